#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "ctv/solver.hpp"

namespace ctv {

namespace detail {

// 15 significant digits; infinities as the literal "inf".
inline std::string format_real(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

}  // namespace detail

inline std::string format_trace_csv(const std::vector<TraceRow>& trace) {
  if (trace.empty()) throw ParamError("trace must be non-empty");
  std::string out = "k,tv,l_norm,residual_adj,step_l1,psnr\n";
  for (const TraceRow& row : trace) {
    out += std::to_string(row.k);
    out += ',';
    out += detail::format_real(row.tv);
    out += ',';
    out += detail::format_real(row.l_norm);
    out += ',';
    out += detail::format_real(row.residual_adj);
    out += ',';
    out += detail::format_real(row.step_l1);
    out += ',';
    if (row.psnr) out += detail::format_real(*row.psnr);
    out += '\n';
  }
  return out;
}

inline void write_trace_csv(const std::vector<TraceRow>& trace,
                            const std::string& path) {
  const std::string text = format_trace_csv(trace);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open trace file '" + path + "' for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw IoError("short write to trace file '" + path + "'");
}

}  // namespace ctv
