// ctv — deconvolution toolkit CLI.
//
// Subcommands: generate shape, blur, deblur, psnr, experiment.
// Exit codes: 0 success, 2 bad arguments/config, 3 I/O or parse failure,
// 4 solver diverged while the config marks divergence as fatal.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ctv/ctv.hpp"

namespace {

struct KernelCli {
  std::string kind;
  double sigma = 1.0;
  bool sigma_set = false;
  int n = 9;
  bool n_set = false;
  std::string taps;
  bool normalize = false;
};

void add_kernel_flags(CLI::App* cmd, KernelCli& k) {
  cmd->add_option("--kernel", k.kind, "Blur kernel: gaussian|box|file")
      ->required()
      ->check(CLI::IsMember({"gaussian", "box", "file"}));
  cmd->add_option("--sigma", k.sigma, "Gaussian standard deviation")
      ->each([&k](const std::string&) { k.sigma_set = true; });
  cmd->add_option("--n", k.n, "Box size (odd)")->each([&k](const std::string&) {
    k.n_set = true;
  });
  cmd->add_option("--taps", k.taps, "Kernel tap file");
  cmd->add_flag("--normalize", k.normalize,
                "Rescale file taps to unit sum");
}

ctv::KernelSpec resolve_kernel(const KernelCli& k) {
  ctv::KernelSpec spec;
  if (k.kind == "gaussian") {
    if (!k.sigma_set) throw ctv::ParamError("--kernel gaussian needs --sigma");
    spec.kind = ctv::KernelSpec::Kind::Gaussian;
    spec.sigma_b = k.sigma;
  } else if (k.kind == "box") {
    if (!k.n_set) throw ctv::ParamError("--kernel box needs --n");
    spec.kind = ctv::KernelSpec::Kind::Box;
    spec.n = k.n;
  } else {
    if (k.taps.empty()) throw ctv::ParamError("--kernel file needs --taps");
    spec.kind = ctv::KernelSpec::Kind::File;
    spec.taps_path = k.taps;
    spec.normalize_taps = k.normalize;
  }
  return spec;
}

std::string format_psnr(double value) {
  if (std::isinf(value)) return "inf";
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.4f", value);
  return buf;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Deconvolution toolkit: controlled-TV and comparator solvers"};
  app.require_subcommand(1);

  // --- generate shape ---
  CLI::App* generate =
      app.add_subcommand("generate", "Create a synthetic test image");
  generate->require_subcommand(1);
  CLI::App* gen_shape = generate->add_subcommand(
      "shape", "Piecewise-constant geometric test image");
  int shape_size = 128;
  std::string shape_out;
  gen_shape->add_option("--size", shape_size, "Side length (>= 32)")
      ->required();
  gen_shape->add_option("--out", shape_out, "Output PGM path")->required();

  // --- blur ---
  CLI::App* blur = app.add_subcommand("blur", "Apply a blur kernel and noise");
  KernelCli blur_kernel;
  add_kernel_flags(blur, blur_kernel);
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  std::string blur_in, blur_out;
  blur->add_option("--noise-sigma", noise_sigma, "Gaussian noise sigma");
  blur->add_option("--seed", seed, "Noise generator seed");
  blur->add_option("--in", blur_in, "Input PGM")->required();
  blur->add_option("--out", blur_out, "Output PGM")->required();

  // --- deblur ---
  CLI::App* deblur = app.add_subcommand("deblur", "Restore a blurred image");
  std::string method;
  deblur->add_option("--method", method, "ctv|tv|dgd|l2|h1")
      ->required()
      ->check(CLI::IsMember({"ctv", "tv", "dgd", "l2", "h1"}));
  ctv::SolverConfig cfg;
  bool theta_set = false;
  deblur->add_option("--h", cfg.h, "Step size");
  deblur->add_option("--lambda", cfg.lambda, "Fidelity multiplier");
  deblur->add_option("--theta", cfg.theta, "Relaxation base in (0,1]")
      ->each([&theta_set](const std::string&) { theta_set = true; });
  deblur->add_option("--beta", cfg.beta, "Curvature smoothing");
  deblur->add_option("--eps", cfg.eps_tol, "Stopping tolerance");
  deblur->add_option("--max-iter", cfg.max_iter, "Iteration cap");
  deblur->add_option("--mu", cfg.mu, "Baseline penalty weight");
  KernelCli deblur_kernel;
  add_kernel_flags(deblur, deblur_kernel);
  std::string deblur_in, deblur_ref, deblur_out, deblur_trace;
  deblur->add_option("--in", deblur_in, "Blurred input PGM")->required();
  deblur->add_option("--ref", deblur_ref, "Reference PGM for PSNR tracing");
  deblur->add_option("--out", deblur_out, "Restored output PGM")->required();
  deblur->add_option("--trace", deblur_trace, "Iteration trace CSV");

  // --- psnr ---
  CLI::App* psnr_cmd = app.add_subcommand("psnr", "PSNR between two images");
  std::string psnr_a, psnr_b;
  psnr_cmd->add_option("a", psnr_a, "First PGM")->required();
  psnr_cmd->add_option("b", psnr_b, "Second PGM")->required();

  // --- experiment ---
  CLI::App* experiment =
      app.add_subcommand("experiment", "Run a configured experiment");
  std::string config_path;
  int jobs = 0;
  experiment->add_option("--config", config_path, "Experiment config file")
      ->required();
  experiment->add_option("--jobs", jobs, "Parallel solver runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (gen_shape->parsed()) {
      ctv::save_pgm(ctv::generate_shape(shape_size), shape_out);
    } else if (blur->parsed()) {
      const ctv::ConvolutionKernel K = resolve_kernel(blur_kernel).build();
      const ctv::ImageGrid in = ctv::load_pgm(blur_in);
      const ctv::ImageGrid out =
          ctv::add_gaussian_noise(ctv::apply(K, in), {noise_sigma, seed});
      ctv::save_pgm(out, blur_out);
    } else if (deblur->parsed()) {
      const ctv::KernelSpec kspec = resolve_kernel(deblur_kernel);
      const ctv::ConvolutionKernel K = kspec.build();
      if (!theta_set) cfg.theta = kspec.default_theta();
      const ctv::ImageGrid u = ctv::load_pgm(deblur_in);
      std::optional<ctv::ImageGrid> ref;
      if (!deblur_ref.empty()) ref = ctv::load_pgm(deblur_ref);
      const ctv::ImageGrid* ref_ptr = ref ? &*ref : nullptr;

      ctv::SolverResult res;
      if (method == "ctv") res = ctv::run_ctv(u, K, cfg, ref_ptr);
      else if (method == "tv") res = ctv::run_classical_tv(u, K, cfg, ref_ptr);
      else if (method == "dgd") res = ctv::run_dgd(u, K, cfg, ref_ptr);
      else if (method == "l2")
        res = ctv::run_baseline(u, K, cfg, ctv::Penalty::L2, ref_ptr);
      else
        res = ctv::run_baseline(u, K, cfg, ctv::Penalty::H1, ref_ptr);

      ctv::save_pgm(res.image, deblur_out);
      if (!deblur_trace.empty()) ctv::write_trace_csv(res.trace, deblur_trace);
      std::cout << "method=" << method
                << " termination=" << ctv::to_string(res.termination)
                << " iterations=" << res.iterations;
      if (ref_ptr)
        std::cout << " psnr=" << format_psnr(ctv::psnr(res.image, *ref_ptr))
                  << "db";
      std::cout << "\n";
    } else if (psnr_cmd->parsed()) {
      const double value =
          ctv::psnr(ctv::load_pgm(psnr_a), ctv::load_pgm(psnr_b));
      std::cout << "PSNR=" << format_psnr(value) << "db\n";
    } else if (experiment->parsed()) {
      ctv::ExperimentSpec spec = ctv::load_experiment_config(config_path);
      if (jobs > 0) spec.jobs = jobs;
      const ctv::ExperimentOutcome outcome = ctv::run_experiment(spec);
      std::cout << ctv::format_summary_csv(outcome.summary);
      if (outcome.any_diverged && spec.divergence_fatal) {
        std::cerr << "ctv: a solver diverged and divergence_fatal is set\n";
        return 4;
      }
    }
  } catch (const ctv::ParseError& e) {
    std::cerr << "ctv: " << e.what() << "\n";
    return 3;
  } catch (const ctv::IoError& e) {
    std::cerr << "ctv: " << e.what() << "\n";
    return 3;
  } catch (const ctv::ParamError& e) {
    std::cerr << "ctv: " << e.what() << "\n";
    return 2;
  } catch (const ctv::DimensionError& e) {
    std::cerr << "ctv: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "ctv: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
