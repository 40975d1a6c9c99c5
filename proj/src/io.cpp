#include "nullot/io.hpp"

#include <filesystem>
#include <fstream>

#include <json.hpp>

#include "nullot/errors.hpp"
#include "nullot/measures.hpp"

namespace nullot {

using json = nlohmann::ordered_json;

namespace {

json array_to_json(const ArrayXd& a) {
  json out = json::array();
  for (Eigen::Index i = 0; i < a.size(); ++i) out.push_back(a[i]);
  return out;
}

ArrayXd array_from_json(const json& j, const std::string& what) {
  if (!j.is_array()) throw InputError(what + ": expected an array");
  ArrayXd a(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& v : j) {
    if (!v.is_number()) throw InputError(what + ": expected numbers");
    a[i++] = v.get<double>();
  }
  return a;
}

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw InputError("parse error in '" + path + "': " + e.what());
  }
  return j;
}

void dump_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out << j.dump(2) << "\n";
}

json interval_to_json(const GaugeInterval& iv) {
  json j;
  j["a"] = iv.a;
  if (std::isfinite(iv.b)) j["b"] = iv.b;
  else j["b"] = "inf";
  j["has_initial"] = iv.has_initial_point;
  j["has_final"] = iv.has_final_point;
  return j;
}

GaugeInterval interval_from_json(const json& j) {
  GaugeInterval iv;
  iv.a = j.at("a").get<double>();
  if (j.at("b").is_string()) {
    if (j.at("b").get<std::string>() != "inf") throw InputError("interval b: expected 'inf'");
    iv.b = kInfinity;
  } else {
    iv.b = j.at("b").get<double>();
  }
  iv.has_initial_point = j.at("has_initial").get<bool>();
  iv.has_final_point = j.at("has_final").get<bool>();
  return iv;
}

json ray_to_json(const Ray& r) {
  json j;
  j["id"] = r.id;
  j["weight"] = r.weight;
  j["interval"] = interval_to_json(r.interval);
  j["knots"] = array_to_json(r.density.knots);
  j["values"] = array_to_json(r.density.values);
  if (r.embedding) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < r.embedding->rows(); ++i) {
      json row = json::array();
      for (Eigen::Index c = 0; c < r.embedding->cols(); ++c) row.push_back((*r.embedding)(i, c));
      rows.push_back(std::move(row));
    }
    j["embedding"] = std::move(rows);
  }
  return j;
}

Ray ray_from_json(const json& j) {
  Ray r;
  r.id = j.at("id").get<std::string>();
  r.weight = j.at("weight").get<double>();
  r.interval = interval_from_json(j.at("interval"));
  r.density.knots = array_from_json(j.at("knots"), "ray " + r.id + " knots");
  r.density.values = array_from_json(j.at("values"), "ray " + r.id + " values");
  if (j.contains("embedding")) {
    const json& rows = j.at("embedding");
    if (!rows.is_array() || rows.empty()) throw InputError("embedding: expected rows");
    MatrixXd e(static_cast<Eigen::Index>(rows.size()),
               static_cast<Eigen::Index>(rows.front().size()));
    Eigen::Index i = 0;
    for (const auto& row : rows) {
      if (static_cast<Eigen::Index>(row.size()) != e.cols())
        throw InputError("embedding: ragged rows");
      Eigen::Index c = 0;
      for (const auto& v : row) e(i, c++) = v.get<double>();
      ++i;
    }
    r.embedding = std::move(e);
  }
  return r;
}

json pl_to_json(const PiecewiseLinear& m) {
  json j;
  j["x"] = array_to_json(m.x);
  j["y"] = array_to_json(m.y);
  return j;
}

PiecewiseLinear pl_from_json(const json& j) {
  return {array_from_json(j.at("x"), "map x"), array_from_json(j.at("y"), "map y")};
}

}  // namespace

void write_hypersurface(const SNH& h, const std::string& path) {
  json j;
  j["format"] = "snh-1";
  if (h.dimension_hint()) j["dimension_hint"] = *h.dimension_hint();
  if (h.has_tip()) j["shared_tip"] = h.tip_rays();
  json rays = json::array();
  for (const Ray& r : h.rays()) rays.push_back(ray_to_json(r));
  j["rays"] = std::move(rays);
  dump_json(j, path);
}

RawHypersurface read_hypersurface_raw(const std::string& path) {
  const json j = load_json(path);
  if (!j.contains("rays")) throw InputError("'" + path + "': missing rays");
  RawHypersurface raw;
  for (const auto& rj : j.at("rays")) raw.rays.push_back(ray_from_json(rj));
  if (j.contains("shared_tip"))
    raw.tip_rays = j.at("shared_tip").get<std::vector<std::string>>();
  if (j.contains("dimension_hint")) raw.dimension_hint = j.at("dimension_hint").get<double>();
  return raw;
}

SNH read_hypersurface(const std::string& path) {
  RawHypersurface raw = read_hypersurface_raw(path);
  return make_hypersurface(std::move(raw.rays), std::move(raw.tip_rays), raw.dimension_hint);
}

void write_measure(const HMeasure& mu, const std::string& path) {
  json j;
  j["format"] = "hm-1";
  json slices = json::array();
  for (const RayMeasureSlice& s : mu.slices) {
    json sj;
    sj["ray"] = s.ray_id;
    sj["mass"] = s.mass;
    sj["knots"] = array_to_json(s.knots);
    sj["values"] = array_to_json(s.values);
    if (!s.atoms.empty()) {
      json atoms = json::array();
      for (const auto& [g, m] : s.atoms) atoms.push_back(json::array({g, m}));
      sj["atoms"] = std::move(atoms);
    }
    slices.push_back(std::move(sj));
  }
  j["slices"] = std::move(slices);
  dump_json(j, path);
}

HMeasure read_measure(const std::string& path, const SNH& h) {
  const json j = load_json(path);
  std::vector<RayMeasureSlice> slices;
  for (const auto& sj : j.at("slices")) {
    RayMeasureSlice s;
    s.ray_id = sj.at("ray").get<std::string>();
    s.mass = sj.at("mass").get<double>();
    s.knots = array_from_json(sj.at("knots"), "slice knots");
    s.values = array_from_json(sj.at("values"), "slice values");
    if (sj.contains("atoms")) {
      for (const auto& a : sj.at("atoms"))
        s.atoms.emplace_back(a.at(0).get<double>(), a.at(1).get<double>());
    }
    slices.push_back(std::move(s));
  }
  return make_measure(std::move(slices), h);
}

namespace {

std::ofstream open_csv(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write '" + path + "'");
  out.precision(17);
  return out;
}

}  // namespace

void write_plan_csv(const DynamicalPlan& plan, const std::string& path) {
  auto out = open_csv(path);
  out << "ray,src_lo,src_hi,dst_lo,dst_hi,mass\n";
  for (const RayPlan& rp : plan.rays) {
    for (const PlanSegment& s : rp.segments) {
      out << rp.ray_id << ',' << s.src_lo << ',' << s.src_hi << ',' << s.dst_lo << ','
          << s.dst_hi << ',' << s.mass << '\n';
    }
  }
}

void write_entropy_csv(const HMeasure& mu, const SNH& h, const std::string& path) {
  auto out = open_csv(path);
  out << "ray,mass,entropy_contribution\n";
  for (const RayMeasureSlice& s : mu.slices) {
    HMeasure one;
    RayMeasureSlice copy = s;
    copy.mass = s.mass;
    one.slices.push_back(copy);
    // contribution of this slice to the full integral (no renormalization)
    double contrib = 0.0;
    if (!s.atoms.empty() && s.atom_mass() > 0.0) {
      contrib = kInfinity;
    } else {
      const Ray& r = h.ray(s.ray_id);
      for (Eigen::Index i = 0; i < s.values.size(); ++i) {
        const double p = s.values[i];
        if (p <= 0.0) continue;
        const double lo = s.knots[i], hi = s.knots[i + 1];
        const double lg = pl_log_integral_cached(r.pl(), r.cum, lo, hi);
        if (lg == -kInfinity) {
          contrib = kInfinity;
          break;
        }
        contrib += p * (hi - lo) * std::log(p / r.weight) - p * lg;
      }
    }
    out << s.ray_id << ',' << s.mass << ',' << contrib << '\n';
  }
}

void write_trace_csv(const GeodesicTrace& trace, const std::string& path) {
  auto out = open_csv(path);
  out << "s,t,tdot,r\n";
  for (const TraceSample& p : trace.samples) {
    out << p.s << ',' << p.t << ',' << p.tdot << ',' << p.r << '\n';
  }
}

void write_content_curve_csv(const SNH& h, const std::vector<double>& gauges,
                             const std::string& path) {
  auto out = open_csv(path);
  out << "gauge,content\n";
  for (double g : gauges) {
    double content = 0.0;
    for (const Ray& r : h.rays()) {
      if (g >= r.interval.a && g < r.interval.b) content += r.weight * pl_eval(r.pl(), g);
    }
    out << g << ',' << content << '\n';
  }
}

void write_sequence(const ApproximationSequence& seq, const std::string& directory,
                    const std::string& name) {
  namespace fs = std::filesystem;
  fs::create_directories(directory);
  const std::string limit_file = name + "_limit.snh";
  write_hypersurface(seq.limit, (fs::path(directory) / limit_file).string());
  json j;
  j["format"] = "snh-seq-1";
  j["limit"] = limit_file;
  json steps = json::array();
  for (const ApproximationStep& s : seq.steps) {
    const std::string step_file = name + "_step" + std::to_string(s.index) + ".snh";
    write_hypersurface(s.hypersurface, (fs::path(directory) / step_file).string());
    json sj;
    sj["index"] = s.index;
    sj["eps"] = s.eps_n;
    sj["hypersurface"] = step_file;
    json maps = json::array();
    for (const RayMaps& m : s.maps) {
      json mj;
      mj["ray"] = m.ray_id;
      mj["to_limit"] = pl_to_json(m.to_limit);
      mj["from_limit"] = pl_to_json(m.from_limit);
      maps.push_back(std::move(mj));
    }
    sj["maps"] = std::move(maps);
    steps.push_back(std::move(sj));
  }
  j["steps"] = std::move(steps);
  dump_json(j, (fs::path(directory) / (name + "_manifest.json")).string());
}

ApproximationSequence read_sequence(const std::string& manifest_path) {
  namespace fs = std::filesystem;
  const json j = load_json(manifest_path);
  const fs::path dir = fs::path(manifest_path).parent_path();
  ApproximationSequence seq;
  seq.limit = read_hypersurface((dir / j.at("limit").get<std::string>()).string());
  for (const auto& sj : j.at("steps")) {
    ApproximationStep step;
    step.index = sj.at("index").get<int>();
    step.eps_n = sj.at("eps").get<double>();
    step.hypersurface =
        read_hypersurface((dir / sj.at("hypersurface").get<std::string>()).string());
    for (const auto& mj : sj.at("maps")) {
      RayMaps m;
      m.ray_id = mj.at("ray").get<std::string>();
      m.to_limit = pl_from_json(mj.at("to_limit"));
      m.from_limit = pl_from_json(mj.at("from_limit"));
      step.maps.push_back(std::move(m));
    }
    seq.steps.push_back(std::move(step));
  }
  return seq;
}

}  // namespace nullot
