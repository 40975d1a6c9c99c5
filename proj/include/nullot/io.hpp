#pragma once

#include <string>
#include <vector>

#include "nullot/core.hpp"
#include "nullot/measures.hpp"
#include "nullot/smooth.hpp"
#include "nullot/stability.hpp"
#include "nullot/transport.hpp"

namespace nullot {

/// Unvalidated hypersurface data as parsed from disk; feed to
/// make_hypersurface (or disintegration_check for diagnostics).
struct RawHypersurface {
  std::vector<Ray> rays;
  std::vector<std::string> tip_rays;
  std::optional<double> dimension_hint;
};

/// JSON hypersurface format; numeric fields round-trip bit-exactly.
void write_hypersurface(const SNH& h, const std::string& path);
RawHypersurface read_hypersurface_raw(const std::string& path);
SNH read_hypersurface(const std::string& path);

void write_measure(const HMeasure& mu, const std::string& path);
HMeasure read_measure(const std::string& path, const SNH& h);

/// Plan rows as CSV (ray, src_lo, src_hi, dst_lo, dst_hi, mass).
void write_plan_csv(const DynamicalPlan& plan, const std::string& path);
/// Entropy breakdown as CSV (ray, mass, entropy contribution).
void write_entropy_csv(const HMeasure& mu, const SNH& h, const std::string& path);
/// Geodesic trace as CSV (s, t, tdot, r).
void write_trace_csv(const GeodesicTrace& trace, const std::string& path);
/// Section-content curve as CSV (gauge, closed_form_content).
void write_content_curve_csv(const SNH& h, const std::vector<double>& gauges,
                             const std::string& path);

/// Stability sequence: a manifest referencing per-step hypersurface files and
/// inline map tables.
void write_sequence(const ApproximationSequence& seq, const std::string& directory,
                    const std::string& name);
ApproximationSequence read_sequence(const std::string& manifest_path);

}  // namespace nullot
