#pragma once

#include <string>

#include "voltguard/trace.hpp"

namespace voltguard {

/// CSV header written by write_trace_csv.
inline constexpr const char* kTraceCsvHeader =
    "t,current,soc_true,soc_cc,v_true,v_meas,v_pred,e1,v_hat,"
    "v_openloop,v_closedloop,region,attack_active";

/// Writes the trace; absent estimator columns emit empty fields.
/// Deterministic, full double precision.
void write_trace_csv(const TimeSeriesTrace& trace, const std::string& path);

/// Reads a trace CSV written by write_trace_csv.
TimeSeriesTrace read_trace_csv(const std::string& path);

/// Minimal static SVG line chart of the voltage columns (v_true, v_meas
/// and any present estimator series).
void write_trace_svg(const TimeSeriesTrace& trace, const std::string& path);

}  // namespace voltguard
