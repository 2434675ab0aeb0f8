#pragma once

// Standalone SVG 1.1 charts for RDCs and impacted-traffic curves.

#include <span>
#include <string>

#include "scorescope/experiments.hpp"
#include "scorescope/rdc.hpp"

namespace scorescope::cli {

inline constexpr int kSvgWidth = 800;
inline constexpr int kSvgHeight = 400;

/// Two panels: linear frequency and log(1 + count), each with mode markers
/// and the threshold band (when present) shaded.
std::string rdc_svg(const Rdc& rdc, const RdcDiagnosis* diagnosis,
                    const std::string& title);

/// Upper bound of impacted traffic against the new model's accuracy.
std::string curve_svg(double baseline, std::span<const CurvePoint> points);

std::string xml_escape(const std::string& s);

}  // namespace scorescope::cli
