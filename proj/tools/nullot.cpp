// Command-line front end: instance generation, validation, and the
// verification suites (concavity search, localization, area monotonicity,
// trapped-region bound, warped-product geodesics, stability).
//
// Exit codes: 0 pass, 1 fail, 2 inapplicable / hypothesis gate, 3 input error.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <set>

#include <CLI11.hpp>
#include <json.hpp>

#include "nullot/errors.hpp"
#include "nullot/geometry.hpp"
#include "nullot/io.hpp"
#include "nullot/nec.hpp"
#include "nullot/smooth.hpp"
#include "nullot/stability.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace nullot;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitInapplicable = 2;
constexpr int kExitInput = 3;

struct CommonOpts {
  std::string out_dir = ".";
  bool no_timestamp = false;
  std::string format = "structured-text";
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  char buf[64];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
  return buf;
}

void emit_report(const CommonOpts& common, const std::string& name, json report) {
  if (!common.no_timestamp) report["timestamp"] = timestamp();
  fs::create_directories(common.out_dir);
  const fs::path path = fs::path(common.out_dir) / (name + "_report.json");
  std::ofstream out(path);
  out << report.dump(2) << "\n";
  std::cout << "report written to " << path.string() << "\n";
}

json eps_json(const std::vector<double>& grid) {
  json j = json::array();
  for (double e : grid) j.push_back(e);
  return j;
}

std::vector<double> parse_eps_grid(const std::string& text) {
  std::vector<double> grid;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t next = text.find(',', pos);
    if (next == std::string::npos) next = text.size();
    grid.push_back(std::stod(text.substr(pos, next - pos)));
    pos = next + 1;
  }
  return grid;
}

json concavity_json(const ConcavityReport& r) {
  json j;
  j["pass"] = r.pass;
  j["vacuous"] = r.vacuous;
  j["max_violation"] = r.max_violation;
  j["tolerance"] = kConcavityTol;
  if (r.witness) j["witness_t"] = json::array({(*r.witness)[0], (*r.witness)[1], (*r.witness)[2]});
  j["t_grid_size"] = static_cast<int>(r.t_grid.size()) - 1;
  return j;
}

json search_json(const SearchReport& r) {
  json j;
  j["verdict"] = r.verdict == SearchReport::Verdict::pass
                     ? "pass"
                     : (r.verdict == SearchReport::Verdict::fail ? "fail" : "vacuous");
  j["trials"] = r.trials_run;
  j["feasible_trials"] = r.feasible_trials;
  j["worst_violation"] = r.worst_violation;
  if (r.failing_trial >= 0) j["failing_trial"] = r.failing_trial;
  if (r.witness_pair) {
    json w;
    w["ray"] = r.witness_pair->ray_id;
    w["src"] = json::array({r.witness_pair->src_lo, r.witness_pair->src_hi});
    w["dst"] = json::array({r.witness_pair->dst_lo, r.witness_pair->dst_hi});
    j["witness_pair"] = std::move(w);
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"synthetic null hypersurface toolkit"};
  app.require_subcommand(1);

  CommonOpts common;
  if (const char* env = std::getenv("NULLOT_OUT")) common.out_dir = env;
  app.add_option("--out-dir", common.out_dir, "directory for reports and artifacts");
  app.add_flag("--no-timestamp", common.no_timestamp,
               "omit timestamps so identical runs are byte-identical");
  app.add_option("--format", common.format, "report format: structured-text|csv");

  // ---- generate ----------------------------------------------------------
  auto* gen = app.add_subcommand("generate", "generate model hypersurface instances");
  std::string gen_kind = "cone", gen_out = "instance.snh";
  int gen_n = 4, gen_rays = 64, gen_steps = 6;
  double gen_horizon = 10.0, gen_radius = 2.0;
  std::string gen_family = "outgoing";
  std::uint64_t gen_seed = 1;
  double gen_sigma = 1.5;
  bool gen_adversarial = false;
  gen->add_option("kind", gen_kind, "cone | sphere | warped-boundary | stability-sequence")
      ->required();
  gen->add_option("--n", gen_n, "ambient dimension (cone)");
  gen->add_option("--horizon", gen_horizon, "truncation horizon");
  gen->add_option("--rays", gen_rays, "ray count");
  gen->add_option("--radius", gen_radius, "sphere radius");
  gen->add_option("--family", gen_family, "outgoing | ingoing (sphere)");
  gen->add_option("--steps", gen_steps, "sequence length (stability-sequence)");
  gen->add_option("--seed", gen_seed, "generator seed");
  gen->add_option("--sigma", gen_sigma, "adversarial density ratio (stability-sequence)");
  gen->add_flag("--adversarial", gen_adversarial,
                "emit the sigma-violating sequence instead of the convergent one");
  gen->add_option("--out", gen_out, "output file (or sequence name)");

  // ---- validate ----------------------------------------------------------
  auto* val = app.add_subcommand("validate", "parse an instance and re-check its invariants");
  std::string val_input, val_measure, val_entropy_csv;
  val->add_option("--input", val_input, "hypersurface file")->required();
  val->add_option("--measure", val_measure, "measure file to validate against the instance");
  val->add_option("--entropy-csv", val_entropy_csv, "write per-ray entropy contributions");

  // ---- nce ---------------------------------------------------------------
  auto* nce = app.add_subcommand("nce", "entropy-power concavity test / randomized search");
  std::string nce_input, nce_mu0, nce_mu1, nce_interp;
  double nce_N = 4.0;
  long long nce_trials = 10000;
  std::uint64_t nce_seed = 7;
  int nce_grid = 64;
  nce->add_option("--input", nce_input, "hypersurface file")->required();
  nce->add_option("--N", nce_N, "dimension parameter (> 1)")->required();
  nce->add_option("--mu0", nce_mu0, "first marginal (file); search mode when absent");
  nce->add_option("--mu1", nce_mu1, "second marginal (file)");
  nce->add_option("--trials", nce_trials, "search trials");
  nce->add_option("--seed", nce_seed, "search seed");
  nce->add_option("--grid", nce_grid, "interpolation grid intervals");
  nce->add_option("--export-interp", nce_interp,
                  "comma list of t values; writes interpolated measures");

  // ---- localize ----------------------------------------------------------
  auto* loc = app.add_subcommand("localize", "cross-check CD certificates against the search");
  std::string loc_input;
  double loc_N = 4.0;
  long long loc_trials = 10000;
  std::uint64_t loc_seed = 7;
  loc->add_option("--input", loc_input)->required();
  loc->add_option("--N", loc_N)->required();
  loc->add_option("--trials", loc_trials);
  loc->add_option("--seed", loc_seed);

  // ---- hawking -----------------------------------------------------------
  auto* haw = app.add_subcommand("hawking", "area monotonicity between ordered sections");
  std::string haw_input, haw_curve_csv;
  double haw_N = 4.0, haw_s1 = 1.0, haw_s2 = 2.0;
  haw->add_option("--input", haw_input)->required();
  haw->add_option("--N", haw_N)->required();
  haw->add_option("--s1", haw_s1, "gauge of the earlier section");
  haw->add_option("--s2", haw_s2, "gauge of the later section");
  haw->add_option("--curve-csv", haw_curve_csv, "write content-vs-gauge plot data");

  // ---- penrose -----------------------------------------------------------
  auto* pen = app.add_subcommand("penrose", "trapped-region gauge bound");
  std::string pen_input, pen_eps = "1e-2,1e-3,1e-4";
  double pen_N = 4.0;
  pen->add_option("--input", pen_input)->required();
  pen->add_option("--N", pen_N)->required();
  pen->add_option("--eps-grid", pen_eps, "decreasing epsilon grid");

  // ---- warped ------------------------------------------------------------
  auto* war = app.add_subcommand("warped", "warped-product geodesic experiment");
  std::string war_f = "sqrt", war_trace;
  double war_t0 = -1.0, war_tdot0 = 1.0, war_step = 1e-3, war_power = 2.0;
  long war_max_steps = 200000;
  war->add_option("--f", war_f, "warp profile: sqrt | power | radial");
  war->add_option("--power", war_power, "exponent for --f power");
  war->add_option("--t0", war_t0);
  war->add_option("--tdot0", war_tdot0);
  war->add_option("--step", war_step);
  war->add_option("--max-steps", war_max_steps);
  war->add_option("--trace-csv", war_trace, "write the integrated trace");

  // ---- stability ---------------------------------------------------------
  auto* sta = app.add_subcommand("stability", "convergence hypotheses and the limit verdict");
  std::string sta_manifest;
  double sta_N = 4.0;
  long long sta_trials = 2000;
  std::uint64_t sta_seed = 11;
  sta->add_option("--manifest", sta_manifest, "sequence manifest file")->required();
  sta->add_option("--N", sta_N)->required();
  sta->add_option("--trials", sta_trials);
  sta->add_option("--seed", sta_seed);

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      fs::create_directories(common.out_dir);
      if (gen_kind == "cone") {
        ConeOptions opts;
        opts.rays = gen_rays;
        const SNH h = cone_hypersurface(gen_n, gen_horizon, opts);
        write_hypersurface(h, (fs::path(common.out_dir) / gen_out).string());
      } else if (gen_kind == "sphere") {
        SphereOptions opts;
        opts.rays = gen_rays;
        const SphereFamily fam =
            gen_family == "ingoing" ? SphereFamily::ingoing : SphereFamily::outgoing;
        const SNH h = sphere_boundary_hypersurface(gen_radius, gen_horizon, fam, opts);
        write_hypersurface(h, (fs::path(common.out_dir) / gen_out).string());
      } else if (gen_kind == "warped-boundary") {
        const SNH h = warped_boundary_hypersurface(sqrt_warp_null(war_t0, war_tdot0), 1e-3);
        write_hypersurface(h, (fs::path(common.out_dir) / gen_out).string());
      } else if (gen_kind == "stability-sequence") {
        ConeOptions opts;
        opts.rays = std::min(gen_rays, 8);
        opts.rel_spacing = 4e-3;
        const ApproximationSequence seq =
            gen_adversarial
                ? make_adversarial_sigma_sequence(gen_steps, gen_sigma, gen_n, gen_horizon,
                                                  opts)
                : make_perturbed_cone_sequence(gen_steps, gen_n, gen_horizon, gen_seed, opts);
        write_sequence(seq, common.out_dir, gen_out);
      } else {
        std::cerr << "unknown generator kind '" << gen_kind << "'\n";
        return kExitInput;
      }
      std::cout << "generated " << gen_kind << "\n";
      return kExitPass;
    }

    if (val->parsed()) {
      RawHypersurface raw = read_hypersurface_raw(val_input);
      const DisintegrationReport rep = disintegration_check(raw.rays);
      json j;
      j["command"] = "validate";
      j["input"] = val_input;
      j["pass"] = rep.pass;
      json issues = json::array();
      for (const auto& issue : rep.issues) {
        issues.push_back(json{{"ray", issue.ray_id}, {"reason", issue.reason}});
      }
      j["issues"] = std::move(issues);
      int exit_code = rep.pass ? kExitPass : kExitFail;
      if (rep.pass) {
        const SNH h = make_hypersurface(std::move(raw.rays), std::move(raw.tip_rays),
                                        raw.dimension_hint);
        if (!val_measure.empty()) {
          const HMeasure mu = read_measure(val_measure, h);
          j["measure"] = val_measure;
          j["measure_entropy"] = entropy(mu, h);
          if (!val_entropy_csv.empty()) {
            write_entropy_csv(mu, h, (fs::path(common.out_dir) / val_entropy_csv).string());
          }
        }
      }
      emit_report(common, "validate", std::move(j));
      std::cout << (rep.pass ? "valid" : "invalid") << "\n";
      return exit_code;
    }

    if (nce->parsed()) {
      const SNH h = read_hypersurface(nce_input);
      json j;
      j["command"] = "nce";
      j["input"] = nce_input;
      j["N"] = nce_N;
      int exit_code;
      if (!nce_mu0.empty()) {
        if (nce_mu1.empty()) {
          std::cerr << "--mu0 needs --mu1\n";
          return kExitInput;
        }
        const HMeasure m0 = read_measure(nce_mu0, h);
        const HMeasure m1 = read_measure(nce_mu1, h);
        const ConcavityReport rep = nce_test(h, nce_N, m0, m1, nce_grid);
        j["test"] = concavity_json(rep);
        exit_code = rep.pass ? kExitPass : kExitFail;
        if (!nce_interp.empty()) {
          const DynamicalPlan plan = dynamical_plan(monotone_coupling(m0, m1, h), h);
          write_plan_csv(plan, (fs::path(common.out_dir) / "plan.csv").string());
          int idx = 0;
          for (double t : parse_eps_grid(nce_interp)) {
            const HMeasure mt = interpolate(plan, t, h);
            write_measure(mt, (fs::path(common.out_dir) /
                               ("interp_" + std::to_string(idx++) + ".hm"))
                                  .string());
          }
        }
      } else {
        j["seed"] = nce_seed;
        const SearchReport rep = nce_search(h, nce_N, nce_trials, nce_seed, nce_grid);
        j["search"] = search_json(rep);
        exit_code = rep.verdict == SearchReport::Verdict::fail ? kExitFail : kExitPass;
      }
      emit_report(common, "nce", std::move(j));
      return exit_code;
    }

    if (loc->parsed()) {
      const SNH h = read_hypersurface(loc_input);
      const LocalizationReport rep = localization_crosscheck(h, loc_N, loc_trials, loc_seed);
      json j;
      j["command"] = "localize";
      j["input"] = loc_input;
      j["N"] = loc_N;
      j["seed"] = loc_seed;
      j["cd_pass"] = rep.cd_pass;
      if (!rep.cd_pass) {
        j["cd_witness"] =
            json{{"ray", rep.cd.ray_id}, {"knot", rep.cd.witness_knot}, {"deficit", rep.cd.deficit}};
      }
      j["search"] = search_json(rep.search);
      j["agree"] = rep.agree;
      emit_report(common, "localize", std::move(j));
      return rep.agree ? kExitPass : kExitFail;
    }

    if (haw->parsed()) {
      const SNH h = read_hypersurface(haw_input);
      const CrossSection s1 = CrossSection::at_gauge(h, haw_s1);
      const CrossSection s2 = CrossSection::at_gauge(h, haw_s2);
      const HawkingReport rep = hawking_check(s1, s2, h, haw_N);
      json j;
      j["command"] = "hawking";
      j["input"] = haw_input;
      j["N"] = haw_N;
      j["sections"] = json::array({haw_s1, haw_s2});
      j["applicable"] = rep.applicable;
      j["reason"] = rep.reason;
      j["contents"] = json::array({rep.content_1, rep.content_2});
      j["tolerance"] = 1e-9;
      j["pass"] = rep.pass;
      if (!haw_curve_csv.empty()) {
        std::vector<double> gauges;
        for (int k = 0; k <= 50; ++k) gauges.push_back(haw_s1 + (haw_s2 - haw_s1) * k / 50.0);
        write_content_curve_csv(h, gauges, (fs::path(common.out_dir) / haw_curve_csv).string());
      }
      emit_report(common, "hawking", std::move(j));
      if (!rep.applicable) return kExitInapplicable;
      return rep.pass ? kExitPass : kExitFail;
    }

    if (pen->parsed()) {
      const SNH h = read_hypersurface(pen_input);
      const std::vector<double> grid = parse_eps_grid(pen_eps);
      const CrossSection s = CrossSection::at_gauge(h, 0.0);
      const ThetaReport theta = theta_estimate(s, h, grid);
      const PenroseReport rep = penrose_check(h, pen_N, s, theta.closed_form);
      json j;
      j["command"] = "penrose";
      j["input"] = pen_input;
      j["N"] = pen_N;
      j["eps_grid"] = eps_json(grid);
      j["theta_closed_form"] = theta.closed_form;
      j["theta_numeric"] = theta.numeric;
      j["applicable"] = rep.applicable;
      j["reason"] = rep.reason;
      j["bound"] = rep.bound;
      j["max_b"] = rep.max_b;
      j["tolerance"] = 1e-9;
      j["pass"] = rep.pass;
      j["compact"] = rep.compact;
      json rows = json::array();
      for (const PenroseRayRow& row : rep.per_ray) {
        rows.push_back(json{{"ray", row.ray_id}, {"b", row.b}, {"bound", row.bound},
                            {"slack", row.slack}});
      }
      j["per_ray"] = std::move(rows);
      emit_report(common, "penrose", std::move(j));
      if (!rep.applicable) return kExitInapplicable;
      return rep.pass ? kExitPass : kExitFail;
    }

    if (war->parsed()) {
      WarpedProductSpec spec;
      if (war_f == "sqrt") spec = sqrt_warp_null(war_t0, war_tdot0);
      else if (war_f == "power") spec = power_warp_null(war_power, war_t0, war_tdot0);
      else if (war_f == "radial") spec = radial_timelike(war_t0, war_tdot0);
      else {
        std::cerr << "unknown warp profile '" << war_f << "'\n";
        return kExitInput;
      }
      const GeodesicTrace trace = integrate_geodesic(spec, war_step, war_max_steps);
      json j;
      j["command"] = "warped";
      j["warp"] = war_f;
      j["t0"] = war_t0;
      j["tdot0"] = war_tdot0;
      j["step"] = war_step;
      j["b_estimate"] = trace.b_estimate;
      j["conservation_drift"] = trace.conservation_drift;
      j["winding"] = trace.winding();
      j["winding_turns"] = trace.winding() / (2.0 * M_PI);
      j["terminated"] = trace.terminated == GeodesicTrace::Terminated::blow_up
                            ? "blow-up"
                            : (trace.terminated == GeodesicTrace::Terminated::speed_horizon
                                   ? "speed-horizon"
                                   : "steps");
      if (!war_trace.empty())
        write_trace_csv(trace, (fs::path(common.out_dir) / war_trace).string());
      emit_report(common, "warped", std::move(j));
      return kExitPass;
    }

    if (sta->parsed()) {
      const ApproximationSequence seq = read_sequence(sta_manifest);
      const LimitReport rep = limit_nce(seq, sta_N, sta_trials, sta_seed);
      json j;
      j["command"] = "stability";
      j["manifest"] = sta_manifest;
      j["N"] = sta_N;
      j["trials"] = sta_trials;
      j["seed"] = sta_seed;
      json steps = json::array();
      for (const StepCheck& c : rep.hypotheses.steps) {
        steps.push_back(json{{"index", c.index},
                             {"pass", c.pass()},
                             {"max_sigma", c.max_sigma},
                             {"max_composition_dev", c.max_composition_dev},
                             {"max_curve_dev", c.max_curve_dev},
                             {"witness", c.witness}});
      }
      j["hypotheses"] = json{{"pass", rep.hypotheses.pass}, {"steps", std::move(steps)}};
      j["verdict"] = rep.verdict == LimitReport::Verdict::pass
                         ? "pass"
                         : (rep.verdict == LimitReport::Verdict::fail ? "fail" : "inapplicable");
      j["reason"] = rep.reason;
      emit_report(common, "stability", std::move(j));
      if (rep.verdict == LimitReport::Verdict::inapplicable) return kExitInapplicable;
      return rep.verdict == LimitReport::Verdict::pass ? kExitPass : kExitFail;
    }
  } catch (const DomainError& e) {
    std::cerr << "domain error: " << e.what() << "\n";
    return kExitInput;
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ParamError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kExitInput;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitInput;
  }
  return kExitInput;
}
