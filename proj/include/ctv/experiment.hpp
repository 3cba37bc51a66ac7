#pragma once

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "ctv/kernel.hpp"
#include "ctv/metrics.hpp"
#include "ctv/noise.hpp"
#include "ctv/pgm.hpp"
#include "ctv/shape.hpp"
#include "ctv/solver.hpp"
#include "ctv/trace_csv.hpp"

namespace ctv {

enum class MethodKind { Ctv, Tv, Dgd, L2, H1 };

inline const char* to_string(MethodKind m) {
  switch (m) {
    case MethodKind::Ctv: return "ctv";
    case MethodKind::Tv: return "tv";
    case MethodKind::Dgd: return "dgd";
    case MethodKind::L2: return "l2";
    case MethodKind::H1: return "h1";
  }
  return "?";
}

inline std::optional<MethodKind> parse_method(std::string_view name) {
  if (name == "ctv") return MethodKind::Ctv;
  if (name == "tv") return MethodKind::Tv;
  if (name == "dgd") return MethodKind::Dgd;
  if (name == "l2") return MethodKind::L2;
  if (name == "h1") return MethodKind::H1;
  return std::nullopt;
}

struct ImageSourceSpec {
  enum class Kind { Shape, File } kind = Kind::Shape;
  int size = 128;
  std::string path;
};

struct KernelSpec {
  enum class Kind { Gaussian, Box, File } kind = Kind::Gaussian;
  double sigma_b = 1.0;
  int n = 9;
  std::string taps_path;
  bool normalize_taps = false;

  ConvolutionKernel build() const {
    switch (kind) {
      case Kind::Gaussian: return make_gaussian_kernel(sigma_b);
      case Kind::Box: return make_box_kernel(n);
      case Kind::File: return load_kernel(taps_path, normalize_taps);
    }
    throw ParamError("unknown kernel kind");
  }

  /// Per-family relaxation default: 0.98 for Gaussian (and custom) kernels,
  /// 0.998 for box averages.
  double default_theta() const {
    return kind == Kind::Box ? 0.998 : 0.98;
  }
};

struct ExperimentSpec {
  ImageSourceSpec image;
  KernelSpec kernel;
  NoiseSpec noise;
  std::vector<MethodKind> methods;
  std::map<MethodKind, SolverConfig> solver;  // one resolved config per method
  std::string out_dir = "out";
  std::string predenoised;  // optional: use this u instead of blur+noise
  bool divergence_fatal = false;
  int jobs = 1;
};

struct SummaryRow {
  std::string method;
  double psnr_db = 0.0;
  int iterations = 0;
  Termination termination = Termination::MaxIter;
  double wall_time_s = 0.0;
};

struct ExperimentOutcome {
  std::vector<SummaryRow> summary;
  bool any_diverged = false;
};

namespace detail {

inline std::string trim(std::string_view sv) {
  std::size_t a = 0, b = sv.size();
  while (a < b && (sv[a] == ' ' || sv[a] == '\t' || sv[a] == '\r')) ++a;
  while (b > a && (sv[b - 1] == ' ' || sv[b - 1] == '\t' || sv[b - 1] == '\r'))
    --b;
  return std::string(sv.substr(a, b - a));
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t end = s.find(sep, start);
    if (end == std::string::npos) end = s.size();
    std::string piece = trim(std::string_view(s).substr(start, end - start));
    if (!piece.empty()) out.push_back(piece);
    start = end + 1;
  }
  return out;
}

inline double to_real(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    double x = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParamError("config: key '" + key + "' expects a real, got '" + v +
                     "'");
  }
}

inline long to_int(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    long x = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ParamError("config: key '" + key + "' expects an integer, got '" +
                     v + "'");
  }
}

inline bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ParamError("config: key '" + key + "' expects a boolean, got '" + v +
                   "'");
}

// Applies "<param> = value" onto a SolverConfig; returns false when the
// parameter name is unknown.
inline bool set_solver_param(SolverConfig& cfg, const std::string& param,
                             const std::string& key, const std::string& v) {
  if (param == "h") cfg.h = to_real(key, v);
  else if (param == "lambda") cfg.lambda = to_real(key, v);
  else if (param == "theta") cfg.theta = to_real(key, v);
  else if (param == "beta") cfg.beta = to_real(key, v);
  else if (param == "eps") cfg.eps_tol = to_real(key, v);
  else if (param == "max_iter") cfg.max_iter = static_cast<int>(to_int(key, v));
  else if (param == "mu") cfg.mu = to_real(key, v);
  else if (param == "diverge_linf") cfg.diverge_linf = to_real(key, v);
  else return false;
  return true;
}

}  // namespace detail

/// Flat key=value experiment description, '#' comments. Per-method solver
/// overrides use "<method>.<param> = value"; bare parameter names set the
/// shared default. theta falls back to the kernel family default when not
/// given.
inline ExperimentSpec parse_experiment_config(std::string_view text) {
  ExperimentSpec spec;
  SolverConfig shared;
  bool theta_given = false;
  std::map<MethodKind, std::vector<std::pair<std::string, std::string>>>
      overrides;
  std::map<std::string, std::string> kv;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line = detail::trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = detail::trim(std::string_view(line).substr(0, hash));
    std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ParamError("config line " + std::to_string(line_no) +
                       ": expected key=value, got '" + line + "'");
    std::string key = detail::trim(std::string_view(line).substr(0, eq));
    std::string value = detail::trim(std::string_view(line).substr(eq + 1));
    if (key.empty())
      throw ParamError("config line " + std::to_string(line_no) +
                       ": empty key");

    std::size_t dot = key.find('.');
    if (dot != std::string::npos) {
      auto method = parse_method(key.substr(0, dot));
      if (!method)
        throw ParamError("config: unknown method prefix in key '" + key + "'");
      overrides[*method].emplace_back(key.substr(dot + 1), value);
      continue;
    }
    if (detail::set_solver_param(shared, key, key, value)) {
      if (key == "theta") theta_given = true;
      continue;
    }
    if (!kv.emplace(key, value).second)
      throw ParamError("config: duplicate key '" + key + "'");
  }

  auto take = [&kv](const char* key) -> std::optional<std::string> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    std::string v = it->second;
    kv.erase(it);
    return v;
  };

  // image source
  if (auto v = take("image")) {
    if (*v == "shape") {
      spec.image.kind = ImageSourceSpec::Kind::Shape;
      if (auto sz = take("size"))
        spec.image.size = static_cast<int>(detail::to_int("size", *sz));
      else
        throw ParamError("config: image=shape requires size");
    } else if (*v == "file") {
      spec.image.kind = ImageSourceSpec::Kind::File;
      if (auto p = take("path"))
        spec.image.path = *p;
      else
        throw ParamError("config: image=file requires path");
    } else {
      throw ParamError("config: image must be 'shape' or 'file', got '" + *v +
                       "'");
    }
  } else {
    throw ParamError("config: missing required key 'image'");
  }

  // kernel
  if (auto v = take("kernel")) {
    if (*v == "gaussian") {
      spec.kernel.kind = KernelSpec::Kind::Gaussian;
      if (auto s = take("sigma_b"))
        spec.kernel.sigma_b = detail::to_real("sigma_b", *s);
      else
        throw ParamError("config: kernel=gaussian requires sigma_b");
    } else if (*v == "box") {
      spec.kernel.kind = KernelSpec::Kind::Box;
      if (auto n = take("n"))
        spec.kernel.n = static_cast<int>(detail::to_int("n", *n));
      else
        throw ParamError("config: kernel=box requires n");
    } else if (*v == "file") {
      spec.kernel.kind = KernelSpec::Kind::File;
      if (auto p = take("taps"))
        spec.kernel.taps_path = *p;
      else
        throw ParamError("config: kernel=file requires taps");
      if (auto nz = take("normalize_taps"))
        spec.kernel.normalize_taps = detail::to_bool("normalize_taps", *nz);
    } else {
      throw ParamError("config: kernel must be gaussian|box|file, got '" + *v +
                       "'");
    }
  } else {
    throw ParamError("config: missing required key 'kernel'");
  }

  if (auto v = take("noise_sigma"))
    spec.noise.sigma_n = detail::to_real("noise_sigma", *v);
  if (auto v = take("seed"))
    spec.noise.seed = static_cast<std::uint64_t>(detail::to_int("seed", *v));
  if (auto v = take("predenoised")) spec.predenoised = *v;
  if (auto v = take("out_dir")) spec.out_dir = *v;
  else throw ParamError("config: missing required key 'out_dir'");
  if (auto v = take("divergence_fatal"))
    spec.divergence_fatal = detail::to_bool("divergence_fatal", *v);
  if (auto v = take("jobs"))
    spec.jobs = static_cast<int>(detail::to_int("jobs", *v));

  if (auto v = take("methods")) {
    for (const std::string& name : detail::split(*v, ',')) {
      auto m = parse_method(name);
      if (!m) throw ParamError("config: unknown method '" + name + "'");
      spec.methods.push_back(*m);
    }
  }
  if (spec.methods.empty())
    throw ParamError("config: at least one method is required");

  if (!kv.empty())
    throw ParamError("config: unknown key '" + kv.begin()->first + "'");

  if (!theta_given) shared.theta = spec.kernel.default_theta();
  for (MethodKind m : spec.methods) {
    SolverConfig cfg = shared;
    auto it = overrides.find(m);
    if (it != overrides.end())
      for (const auto& [param, value] : it->second) {
        std::string key = std::string(to_string(m)) + "." + param;
        if (!detail::set_solver_param(cfg, param, key, value))
          throw ParamError("config: unknown solver parameter in key '" + key +
                           "'");
      }
    validate(cfg);
    spec.solver[m] = cfg;
  }
  return spec;
}

inline ExperimentSpec load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return parse_experiment_config(text);
}

namespace detail {

inline SolverResult dispatch_method(MethodKind m, const ImageGrid& u,
                                    const ConvolutionKernel& K,
                                    const SolverConfig& cfg,
                                    const ImageGrid* ref) {
  switch (m) {
    case MethodKind::Ctv: return run_ctv(u, K, cfg, ref);
    case MethodKind::Tv: return run_classical_tv(u, K, cfg, ref);
    case MethodKind::Dgd: return run_dgd(u, K, cfg, ref);
    case MethodKind::L2: return run_baseline(u, K, cfg, Penalty::L2, ref);
    case MethodKind::H1: return run_baseline(u, K, cfg, Penalty::H1, ref);
  }
  throw ParamError("unknown method");
}

}  // namespace detail

inline std::string format_summary_csv(const std::vector<SummaryRow>& rows) {
  std::string out = "method,psnr_db,iterations,termination,wall_time_s\n";
  char buf[48];
  for (const SummaryRow& r : rows) {
    out += r.method;
    out += ',';
    out += detail::format_real(r.psnr_db);
    out += ',';
    out += std::to_string(r.iterations);
    out += ',';
    out += to_string(r.termination);
    std::snprintf(buf, sizeof(buf), ",%.3f\n", r.wall_time_s);
    out += buf;
  }
  return out;
}

/// Runs the blur -> (noise) -> deblur pipeline for every requested method,
/// writing restored PGMs, per-iteration trace CSVs and a summary report.
/// Methods run concurrently (up to spec.jobs); outputs are byte-identical
/// for any parallelism degree, wall time aside.
inline ExperimentOutcome run_experiment(const ExperimentSpec& spec) {
  const ImageGrid original =
      spec.image.kind == ImageSourceSpec::Kind::Shape
          ? generate_shape(spec.image.size)
          : load_pgm(spec.image.path);
  const ConvolutionKernel K = spec.kernel.build();

  ImageGrid u = spec.predenoised.empty()
                    ? add_gaussian_noise(apply(K, original), spec.noise)
                    : load_pgm(spec.predenoised);
  if (!u.same_shape(original))
    throw DimensionError("input image " + std::to_string(u.width) + "x" +
                         std::to_string(u.height) +
                         " does not match the reference " +
                         std::to_string(original.width) + "x" +
                         std::to_string(original.height));

  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(spec.out_dir, ec);
  if (ec)
    throw IoError("cannot create output directory '" + spec.out_dir + "': " +
                  ec.message());
  const fs::path dir(spec.out_dir);
  save_pgm(original, (dir / "original.pgm").string());
  save_pgm(u, (dir / "degraded.pgm").string());

  struct Slot {
    SummaryRow row;
    std::exception_ptr error;
  };
  std::vector<Slot> slots(spec.methods.size());
  std::atomic<std::size_t> next{0};

  auto worker = [&]() {
    for (;;) {
      const std::size_t idx = next.fetch_add(1);
      if (idx >= spec.methods.size()) return;
      const MethodKind m = spec.methods[idx];
      try {
        const auto t0 = std::chrono::steady_clock::now();
        SolverResult res =
            detail::dispatch_method(m, u, K, spec.solver.at(m), &original);
        const auto t1 = std::chrono::steady_clock::now();
        const std::string name = to_string(m);
        save_pgm(res.image, (dir / (name + "_restored.pgm")).string());
        write_trace_csv(res.trace, (dir / (name + "_trace.csv")).string());
        slots[idx].row =
            SummaryRow{name, psnr(res.image, original), res.iterations,
                       res.termination,
                       std::chrono::duration<double>(t1 - t0).count()};
      } catch (...) {
        slots[idx].error = std::current_exception();
      }
    }
  };

  const int degree = std::max(
      1, std::min<int>(spec.jobs, static_cast<int>(spec.methods.size())));
  if (degree == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(degree);
    for (int t = 0; t < degree; ++t) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  ExperimentOutcome outcome;
  for (Slot& s : slots) {
    if (s.error) std::rethrow_exception(s.error);
    outcome.any_diverged |= s.row.termination == Termination::Diverged;
    outcome.summary.push_back(std::move(s.row));
  }

  std::ofstream sum((dir / "summary.csv").string(),
                    std::ios::binary | std::ios::trunc);
  if (!sum) throw IoError("cannot write summary.csv in '" + spec.out_dir + "'");
  sum << format_summary_csv(outcome.summary);
  return outcome;
}

}  // namespace ctv
