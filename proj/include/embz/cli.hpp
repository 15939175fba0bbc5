#pragma once

// Command-line front end: config ingestion, orchestration and atomic
// persistence of CSV/JSON artifacts. Exit codes: 0 ok, 2 bad config,
// 3 numerical failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <CLI11.hpp>
#include <unistd.h>

#include "embz/embezzle.hpp"
#include "embz/finchain.hpp"
#include "embz/io.hpp"
#include "embz/pipeline.hpp"
#include "embz/quasifree.hpp"
#include "embz/toeplitz.hpp"

namespace embz::cli {

inline constexpr const char* kToolVersion = "embz 0.1.0";
inline constexpr const char* kJobsEnv = "EMBZ_JOBS";

enum class Command { Criticality, Spectrum, Essspec, Classify, Entropy, Modes, EmbezzleScan, VerifyOracle };

inline const char* to_string(Command c) {
  switch (c) {
    case Command::Criticality: return "criticality";
    case Command::Spectrum: return "spectrum";
    case Command::Essspec: return "essspec";
    case Command::Classify: return "classify";
    case Command::Entropy: return "entropy";
    case Command::Modes: return "modes";
    case Command::EmbezzleScan: return "embezzle-scan";
    case Command::VerifyOracle: return "verify-oracle";
  }
  return "?";
}

struct RunConfig {
  std::string model;  // file path or zoo:NAME[:mu]
  std::optional<std::filesystem::path> out;
  std::optional<std::filesystem::path> thresholds_out;  // embezzle-scan
  std::optional<std::filesystem::path> plot_data;      // entropy
  std::uint64_t seed = 0;
  int jobs = 1;

  SpectralTolerances spectral;
  double clip_tol = 1e-8;
  int hs_terms = 4096;

  std::vector<int> sizes;    // spectrum / entropy
  std::string cut = "half";  // entropy: "half" or an integer
  int n = 64;                // modes
  int cut_site = -1;         // modes; -1 means n/2
  FiniteKernelPolicy kernel_policy = FiniteKernelPolicy::Empty;

  std::vector<int> lengths;
  std::vector<int> dims;
  std::vector<double> eps;
  TargetPolicy policy = TargetPolicy::MaximallyEntangled;
  std::size_t topk = 4096;
  double mass_floor = 1e-6;

  int instances = 200;
  int iterations = 20000;
};

class ConfigError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

namespace detail {

inline int parse_int(std::string_view text, std::string_view field) {
  std::string s(text);
  std::size_t used = 0;
  int v = 0;
  try {
    v = std::stoi(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(std::string(field) + ": '" + s + "' is not an integer");
  return v;
}

inline double parse_double(std::string_view text, std::string_view field) {
  std::string s(text);
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != s.size()) throw ConfigError(std::string(field) + ": '" + s + "' is not a number");
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur.push_back(c);
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace detail

/// Integer schedules: "2,3,4", "a:b:x2" (geometric), "a:b:+s" (arithmetic) or
/// "a,b,...,c" (geometric when b is an integer multiple of a >= 2, else
/// arithmetic). Result must be nonempty and strictly ascending.
inline std::vector<int> parse_schedule(std::string_view text, std::string_view field) {
  std::vector<int> out;
  if (text.find(':') != std::string_view::npos) {
    const auto parts = detail::split(text, ':');
    if (parts.size() != 3 || parts[2].size() < 2 || (parts[2][0] != 'x' && parts[2][0] != '+')) {
      throw ConfigError(std::string(field) + ": expected a:b:xR or a:b:+S, got '" + std::string(text) + "'");
    }
    const int a = detail::parse_int(parts[0], field);
    const int b = detail::parse_int(parts[1], field);
    const int r = detail::parse_int(std::string_view(parts[2]).substr(1), field);
    const bool geometric = parts[2][0] == 'x';
    if (a < 1 || b < a || (geometric ? r < 2 : r < 1)) {
      throw ConfigError(std::string(field) + ": invalid range '" + std::string(text) + "'");
    }
    for (long long v = a; v <= b; v = geometric ? v * r : v + r) out.push_back(static_cast<int>(v));
  } else {
    const auto parts = detail::split(text, ',');
    for (std::size_t i = 0; i < parts.size(); ++i) {
      if (parts[i] == "..." ) {
        if (i < 2 || i + 2 != parts.size()) {
          throw ConfigError(std::string(field) + ": '...' needs two leading terms and one final term");
        }
        const int a = out[0], b = out[1];
        const int last = detail::parse_int(parts[i + 1], field);
        const bool geometric = a > 0 && b % a == 0 && b / a >= 2;
        long long v = out.back();
        while (true) {
          v = geometric ? v * (b / a) : v + (b - a);
          if (v > last || (b - a) <= 0) break;
          out.push_back(static_cast<int>(v));
        }
        if (out.back() != last) {
          throw ConfigError(std::string(field) + ": final term " + std::to_string(last) +
                            " is not reached by the progression");
        }
        break;
      }
      out.push_back(detail::parse_int(parts[i], field));
    }
  }
  if (out.empty()) throw ConfigError(std::string(field) + ": empty schedule");
  for (std::size_t i = 1; i < out.size(); ++i) {
    if (out[i] <= out[i - 1]) throw ConfigError(std::string(field) + ": schedule must be strictly ascending");
  }
  return out;
}

inline std::vector<double> parse_real_list(std::string_view text, std::string_view field) {
  std::vector<double> out;
  for (const auto& p : detail::split(text, ',')) out.push_back(detail::parse_double(p, field));
  if (out.empty()) throw ConfigError(std::string(field) + ": empty list");
  for (double v : out)
    if (!(v > 0.0)) throw ConfigError(std::string(field) + ": values must be positive");
  return out;
}

/// "zoo:XX", "zoo:SSH", "zoo:gapped_shifted_XX[:mu]" or a JSON model path.
inline HoppingModel resolve_model(const std::string& source) {
  if (source.empty()) throw ConfigError("--model: required");
  if (source.rfind("zoo:", 0) == 0) {
    const auto parts = detail::split(std::string_view(source).substr(4), ':');
    ZooParams params;
    if (parts.size() > 1) params.mu = detail::parse_double(parts[1], "--model mu");
    return model_zoo(parse_zoo_name(parts[0]), params);
  }
  return load_model(source);
}

inline void validate(const RunConfig& cfg, Command cmd) {
  if (!(cfg.spectral.zero_tol > 0.0 && cfg.spectral.zero_tol <= 1e-3)) throw ConfigError("--zero-tol: must lie in (0, 1e-3]");
  if (cfg.spectral.grid_size < 256) throw ConfigError("--grid: must be >= 256");
  if (!(cfg.spectral.jump_threshold > 0.0 && cfg.spectral.jump_threshold < 1.0)) {
    throw ConfigError("--jump-threshold: must lie in (0, 1)");
  }
  if (cfg.jobs < 1) throw ConfigError("--jobs: must be >= 1");
  if (!(cfg.clip_tol >= 0.0 && cfg.clip_tol <= 1e-6)) throw ConfigError("--clip-tol: must lie in [0, 1e-6]");
  if (cmd != Command::VerifyOracle && cfg.model.empty()) throw ConfigError("--model: required");
  switch (cmd) {
    case Command::Spectrum:
    case Command::Entropy:
      if (cfg.sizes.empty()) throw ConfigError("--sizes: required");
      break;
    case Command::Modes:
      if (cfg.n < 2) throw ConfigError("--n: must be >= 2");
      break;
    case Command::EmbezzleScan:
      if (cfg.lengths.empty()) throw ConfigError("--lengths: required");
      if (cfg.dims.empty()) throw ConfigError("--dims: required");
      if (cfg.eps.empty()) throw ConfigError("--eps: required");
      if (cfg.topk < 1) throw ConfigError("--topk: must be >= 1");
      if (!(cfg.mass_floor >= 0.0 && cfg.mass_floor < 1.0)) throw ConfigError("--mass-floor: must lie in [0, 1)");
      for (std::size_t i = 1; i < cfg.dims.size(); ++i)
        if (cfg.dims[i] <= cfg.dims[i - 1]) throw ConfigError("--dims: must be strictly ascending");
      break;
    case Command::VerifyOracle:
      if (cfg.instances < 1) throw ConfigError("--instances: must be >= 1");
      if (cfg.iterations < 1000) throw ConfigError("--iterations: must be >= 1000");
      break;
    case Command::Classify:
      if (cfg.hs_terms < 128) throw ConfigError("--hs-terms: must be >= 128");
      break;
    default:
      break;
  }
}

inline json config_to_json(const RunConfig& cfg, Command cmd) {
  auto kp = [](FiniteKernelPolicy p) {
    return p == FiniteKernelPolicy::Empty ? "empty" : p == FiniteKernelPolicy::Full ? "full" : "half";
  };
  json j{{"command", to_string(cmd)},
         {"model", cfg.model},
         {"seed", cfg.seed},
         {"zero_tol", cfg.spectral.zero_tol},
         {"grid", cfg.spectral.grid_size},
         {"jump_threshold", cfg.spectral.jump_threshold},
         {"max_jumps", cfg.spectral.max_jumps}};
  switch (cmd) {
    case Command::Spectrum: j["sizes"] = cfg.sizes; j["clip_tol"] = cfg.clip_tol; break;
    case Command::Entropy: j["sizes"] = cfg.sizes; j["cut"] = cfg.cut; j["kernel_policy"] = kp(cfg.kernel_policy); break;
    case Command::Modes: j["n"] = cfg.n; j["cut"] = cfg.cut_site < 0 ? cfg.n / 2 : cfg.cut_site; j["kernel_policy"] = kp(cfg.kernel_policy); break;
    case Command::Classify: j["hs_terms"] = cfg.hs_terms; break;
    case Command::EmbezzleScan:
      j["lengths"] = cfg.lengths; j["dims"] = cfg.dims; j["eps"] = cfg.eps;
      j["policy"] = to_string(cfg.policy); j["topk"] = cfg.topk; j["mass_floor"] = cfg.mass_floor;
      j["kernel_policy"] = kp(cfg.kernel_policy);
      break;
    case Command::VerifyOracle: j["instances"] = cfg.instances; j["iterations"] = cfg.iterations; break;
    default: break;
  }
  return j;
}

/// Writes via a temporary sibling and rename, so readers never see a partial file.
inline void write_atomically(const std::filesystem::path& path, const std::string& body) {
  auto tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write '" + tmp.string() + "'");
    out << body;
    out.flush();
    if (!out) {
      std::filesystem::remove(tmp);
      throw ConfigError("short write to '" + tmp.string() + "'");
    }
  }
  std::filesystem::rename(tmp, path);
}

struct Artifact {
  std::filesystem::path path;
  std::string body;
};

namespace detail {

inline std::string csv_header(const RunConfig& cfg, Command cmd, const std::string& columns) {
  std::ostringstream os;
  os << "# tool: " << kToolVersion << "\n";
  os << "# config: " << config_to_json(cfg, cmd).dump() << "\n";
  os << "# norm: " << kNormConvention << "\n";
  os << columns << "\n";
  return os.str();
}

inline json json_envelope(const RunConfig& cfg, Command cmd) {
  return json{{"tool", kToolVersion}, {"config", config_to_json(cfg, cmd)}, {"norm_convention", kNormConvention}};
}

inline ModeSpectrum chain_modes(const HoppingModel& model, int n, int cut, FiniteKernelPolicy policy,
                                int* kernel_dim = nullptr) {
  const auto chain = open_chain_hamiltonian(model, n, cut);
  const auto ground = finite_ground_projection(chain, policy);
  if (kernel_dim) *kernel_dim = ground.kernel_dimension;
  return halfchain_modes(chain, ground.projector);
}

}  // namespace detail

struct RunResult {
  int exit_code = 0;
  std::string summary;
  std::vector<Artifact> artifacts;  // path empty => primary output on stdout
};

/// Computes artifacts for a validated config. Throws on failure.
inline RunResult execute(Command cmd, const RunConfig& cfg) {
  validate(cfg, cmd);
  RunResult res;
  const auto primary = cfg.out.value_or(std::filesystem::path{});
  auto fd = [](double v) { return format_double(v); };

  switch (cmd) {
    case Command::Criticality: {
      const auto model = resolve_model(cfg.model);
      const auto report = is_critical(model, cfg.spectral);
      json j = detail::json_envelope(cfg, cmd);
      j["model_name"] = model.name;
      j["support_radius"] = model.radius();
      j["critical"] = report.critical;
      j["discontinuities"] = json::array();
      for (const auto& d : report.evidence) j["discontinuities"].push_back(discontinuity_to_json(d));
      res.artifacts.push_back({primary, j.dump(2) + "\n"});
      res.summary = "criticality: " + model.name + (report.critical ? " is critical (" : " is not critical (") +
                    std::to_string(report.evidence.size()) + " discontinuities)";
      break;
    }
    case Command::Essspec: {
      const auto model = resolve_model(cfg.model);
      const auto psym = ground_state_symbol(build_symbol(model), KernelPolicy::Empty, cfg.spectral);
      const auto ess = essential_spectrum(psym);
      json j = detail::json_envelope(cfg, cmd);
      j["model_name"] = model.name;
      j["essential_spectrum"] = essential_spectrum_to_json(ess);
      j["discontinuities"] = json::array();
      for (const auto& d : psym.discontinuities()) j["discontinuities"].push_back(discontinuity_to_json(d));
      res.artifacts.push_back({primary, j.dump(2) + "\n"});
      res.summary = "essspec: " + model.name + " has " + std::to_string(ess.intervals.size()) +
                    " interval(s) in its essential spectrum";
      break;
    }
    case Command::Classify: {
      const auto model = resolve_model(cfg.model);
      PipelineOptions opt;
      opt.spectral = cfg.spectral;
      opt.hs_terms = cfg.hs_terms;
      const auto rep = classify_model(model, opt);
      json j = detail::json_envelope(cfg, cmd);
      j["model_name"] = model.name;
      j["support_radius"] = model.radius();
      j["verdict"] = to_string(rep.verdict.verdict);
      j["justification"] = rep.verdict.justification;
      j["essential_spectrum"] = essential_spectrum_to_json(rep.essential);
      j["discontinuities"] = json::array();
      for (const auto& d : rep.symbol.discontinuities()) j["discontinuities"].push_back(discontinuity_to_json(d));
      j["hs_verdict"] = hs_verdict_to_json(rep.hs);
      j["evidence"] = rep.decay ? decay_evidence_to_json(*rep.decay)
                                : json{{"skipped", "interval criterion already satisfied"}};
      res.artifacts.push_back({primary, j.dump(2) + "\n"});
      res.summary = std::string("classify: ") + model.name + " -> " + to_string(rep.verdict.verdict);
      break;
    }
    case Command::Spectrum: {
      const auto model = resolve_model(cfg.model);
      const auto psym = ground_state_symbol(build_symbol(model), KernelPolicy::Empty, cfg.spectral);
      std::vector<ModeSpectrum> spectra(cfg.sizes.size());
      parallel_for(cfg.sizes.size(), cfg.jobs, [&](std::size_t i) {
        const int N = cfg.sizes[i];
        spectra[i] = correlation_spectrum(finite_section(psym, N, std::max(cfg.spectral.grid_size, 4 * N)), cfg.clip_tol);
      });
      std::ostringstream os;
      os << detail::csv_header(cfg, cmd, "N,index,lambda");
      for (std::size_t i = 0; i < spectra.size(); ++i)
        for (std::size_t j = 0; j < spectra[i].values.size(); ++j)
          os << cfg.sizes[i] << "," << j << "," << fd(spectra[i].values[j]) << "\n";
      res.artifacts.push_back({primary, os.str()});
      res.summary = "spectrum: " + model.name + ", " + std::to_string(cfg.sizes.size()) + " section sizes";
      break;
    }
    case Command::Entropy: {
      const auto model = resolve_model(cfg.model);
      std::vector<double> entropy(cfg.sizes.size());
      parallel_for(cfg.sizes.size(), cfg.jobs, [&](std::size_t i) {
        const int n = cfg.sizes[i];
        const int cut = cfg.cut == "half" ? n / 2 : detail::parse_int(cfg.cut, "--cut");
        entropy[i] = entanglement_entropy(detail::chain_modes(model, n, cut, cfg.kernel_policy));
      });
      std::ostringstream os, plot;
      os << detail::csv_header(cfg, cmd, "N,entropy_bits");
      plot << "# tool: " << kToolVersion << "\n# ln(N) S_bits\n";
      for (std::size_t i = 0; i < entropy.size(); ++i) {
        os << cfg.sizes[i] << "," << fd(entropy[i]) << "\n";
        plot << fd(std::log(static_cast<double>(cfg.sizes[i]))) << " " << fd(entropy[i]) << "\n";
      }
      res.artifacts.push_back({primary, os.str()});
      if (cfg.plot_data) res.artifacts.push_back({*cfg.plot_data, plot.str()});
      res.summary = "entropy: " + model.name + ", S(" + std::to_string(cfg.sizes.back()) + ") = " +
                    fd(entropy.back()) + " bits";
      break;
    }
    case Command::Modes: {
      const auto model = resolve_model(cfg.model);
      const int cut = cfg.cut_site < 0 ? cfg.n / 2 : cfg.cut_site;
      int kernel_dim = 0;
      const auto modes = detail::chain_modes(model, cfg.n, cut, cfg.kernel_policy, &kernel_dim);
      std::ostringstream os;
      os << detail::csv_header(cfg, cmd, "index,lambda");
      for (std::size_t j = 0; j < modes.values.size(); ++j) os << j << "," << fd(modes.values[j]) << "\n";
      res.artifacts.push_back({primary, os.str()});
      res.summary = "modes: " + modes.source + ", kernel dimension " + std::to_string(kernel_dim);
      break;
    }
    case Command::EmbezzleScan: {
      const auto model = resolve_model(cfg.model);
      ScanConfig sc{cfg.lengths, cfg.dims, cfg.eps, cfg.policy, cfg.topk, cfg.mass_floor, cfg.kernel_policy, cfg.jobs};
      const auto rep = family_scan(model, sc);
      std::ostringstream os;
      os << detail::csv_header(cfg, cmd, "n,d,policy,epsilon,uncertainty,bipartite_bound");
      for (const auto& r : rep.rows) {
        os << r.n << "," << r.d << "," << to_string(r.policy) << "," << fd(r.epsilon) << ","
           << fd(r.uncertainty) << "," << fd(r.bipartite_bound) << "\n";
      }
      json j = detail::json_envelope(cfg, cmd);
      j["model_name"] = model.name;
      j["cover_mesh"] = rep.cover_mesh;
      json th = json::object();
      for (const auto& t : rep.thresholds) {
        th["eps=" + fd(t.eps) + ",d=" + std::to_string(t.d)] = t.n ? json(*t.n) : json(nullptr);
      }
      j["thresholds"] = th;
      j["non_monotone"] = json::array();
      for (const auto& [n, d] : rep.non_monotone) j["non_monotone"].push_back({{"n", n}, {"d", d}});
      j["kernel_dimensions"] = json::array();
      for (std::size_t i = 0; i < rep.rows.size(); i += cfg.dims.size())
        j["kernel_dimensions"].push_back({{"n", rep.rows[i].n}, {"kernel_dimension", rep.rows[i].kernel_dimension}});
      res.artifacts.push_back({primary, os.str()});
      std::filesystem::path tpath = cfg.thresholds_out.value_or(
          primary.empty() ? std::filesystem::path{} : std::filesystem::path(primary.string() + ".thresholds.json"));
      if (!tpath.empty()) res.artifacts.push_back({tpath, j.dump(2) + "\n"});
      res.summary = "embezzle-scan: " + model.name + ", " + std::to_string(rep.rows.size()) + " cells, " +
                    std::to_string(rep.non_monotone.size()) + " non-monotone";
      break;
    }
    case Command::VerifyOracle: {
      const auto instances = random_oracle_instances(cfg.seed, cfg.instances);
      const auto cmp = compare_with_oracle(instances, cfg.seed, cfg.iterations, cfg.jobs);
      std::ostringstream os;
      os << detail::csv_header(cfg, cmd, "instance,rho_len,d,closed_form,oracle,abs_diff");
      int bad = 0;
      double worst = 0.0;
      for (std::size_t i = 0; i < cmp.size(); ++i) {
        const double diff = std::fabs(cmp[i].oracle - cmp[i].closed_form);
        worst = std::max(worst, diff);
        if (diff > kOracleAgreementTol || cmp[i].oracle < cmp[i].closed_form - kOracleUndercutTol) ++bad;
        os << i << "," << instances[i].rho.size() << "," << instances[i].psi.dimension() << ","
           << fd(cmp[i].closed_form) << "," << fd(cmp[i].oracle) << "," << fd(diff) << "\n";
      }
      res.artifacts.push_back({primary, os.str()});
      res.summary = "verify-oracle: " + std::to_string(cmp.size() - bad) + "/" + std::to_string(cmp.size()) +
                    " instances agree, worst |oracle - closed form| = " + fd(worst);
      res.exit_code = bad == 0 ? 0 : 3;
      break;
    }
  }
  return res;
}

/// Runs a command: artifacts with a path are written atomically (all
/// computed before any is written), otherwise printed to `out`.
inline int run(Command cmd, const RunConfig& cfg, std::ostream& out, std::ostream& log) {
  try {
    auto res = execute(cmd, cfg);
    bool printed = false;
    for (const auto& a : res.artifacts) {
      if (a.path.empty()) {
        out << a.body;
        printed = true;
      } else {
        write_atomically(a.path, a.body);
      }
    }
    (printed ? log : out) << res.summary << "\n";
    return res.exit_code;
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    log << "numerical failure in " << to_string(cmd) << ": " << e.what() << "\n";
    return 3;
  } catch (const std::filesystem::filesystem_error& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    log << "numerical failure in " << to_string(cmd) << ": " << e.what() << "\n";
    return 3;
  }
}

inline int default_jobs() {
  if (const char* env = std::getenv(kJobsEnv)) {
    try {
      return std::max(1, std::stoi(env));
    } catch (const std::exception&) {
    }
  }
  return 1;
}

/// Parses argv (subcommand first) and dispatches to run().
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& log = std::cerr) {
  CLI::App app{"Embezzlement and factor-type analysis for free-fermion chains", "embz"};
  app.require_subcommand(1);
  RunConfig cfg;
  cfg.jobs = default_jobs();
  std::string out_path, thresholds_path, plot_path, sizes, lengths, dims, eps, policy = "max-ent",
                                                                             kernel = "empty";

  auto common = [&](CLI::App* sub, bool needs_model = true) {
    if (needs_model) sub->add_option("--model", cfg.model, "model JSON file or zoo:NAME[:mu]")->required();
    sub->add_option("--out", out_path, "output file (default: stdout)");
    sub->add_option("--seed", cfg.seed, "seed recorded in every output");
    sub->add_option("--jobs", cfg.jobs, std::string("worker threads (default $") + kJobsEnv + " or 1)");
    sub->add_option("--zero-tol", cfg.spectral.zero_tol, "kernel band for symbol eigenvalues");
    sub->add_option("--grid", cfg.spectral.grid_size, "k-grid size for scans and quadrature");
    sub->add_option("--jump-threshold", cfg.spectral.jump_threshold, "Frobenius jump threshold");
  };
  auto* crit = app.add_subcommand("criticality", "detect discontinuities of the positive projector symbol");
  common(crit);
  auto* spectrum_cmd = app.add_subcommand("spectrum", "finite-section spectra of the half-chain correlation operator");
  common(spectrum_cmd);
  spectrum_cmd->add_option("--sizes", sizes, "section sizes, e.g. 16,32,...,1024")->required();
  spectrum_cmd->add_option("--clip-tol", cfg.clip_tol, "allowed leakage outside [0,1]");
  auto* ess = app.add_subcommand("essspec", "essential spectrum from the symbol's jumps");
  common(ess);
  auto* cls = app.add_subcommand("classify", "type III_1 / type I-candidate verdict");
  common(cls);
  cls->add_option("--hs-terms", cfg.hs_terms, "Fourier offsets in the Hilbert-Schmidt test");
  auto* ent = app.add_subcommand("entropy", "half-chain entanglement entropy of open chains");
  common(ent);
  ent->add_option("--sizes", sizes, "chain lengths, e.g. 16:512:x2")->required();
  ent->add_option("--cut", cfg.cut, "'half' or a site index");
  ent->add_option("--plot-data", plot_path, "write (ln N, S) pairs here");
  ent->add_option("--kernel-policy", kernel, "empty|full|half");
  auto* mod = app.add_subcommand("modes", "half-chain mode spectrum of one open chain");
  common(mod);
  mod->add_option("--n", cfg.n, "chain length");
  mod->add_option("--cut", cfg.cut_site, "cut site (default n/2)");
  mod->add_option("--kernel-policy", kernel, "empty|full|half");
  auto* scan = app.add_subcommand("embezzle-scan", "embezzlement errors across chain lengths");
  common(scan);
  scan->add_option("--lengths", lengths, "chain lengths, e.g. 8:256:x2")->required();
  scan->add_option("--dims", dims, "target dimensions, e.g. 2,3,4")->required();
  scan->add_option("--eps", eps, "threshold grid, e.g. 0.3,0.1,0.03")->required();
  scan->add_option("--policy", policy, "max-ent|cover");
  scan->add_option("--topk", cfg.topk, "retained many-body eigenvalues");
  scan->add_option("--mass-floor", cfg.mass_floor, "stop once this much mass remains");
  scan->add_option("--thresholds", thresholds_path, "thresholds JSON (default <out>.thresholds.json)");
  scan->add_option("--kernel-policy", kernel, "empty|full|half");
  auto* orc = app.add_subcommand("verify-oracle", "brute-force unitary check of the sorted-spectrum formula");
  common(orc, false);
  orc->add_option("--instances", cfg.instances, "number of random instances");
  orc->add_option("--iterations", cfg.iterations, "local-search steps per restart");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, log);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, log);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, log);
    return 2;
  }

  Command cmd{};
  const std::string name = app.get_subcommands().front()->get_name();
  for (Command c : {Command::Criticality, Command::Spectrum, Command::Essspec, Command::Classify, Command::Entropy,
                    Command::Modes, Command::EmbezzleScan, Command::VerifyOracle}) {
    if (name == to_string(c)) cmd = c;
  }
  try {
    if (!out_path.empty()) cfg.out = out_path;
    if (!thresholds_path.empty()) cfg.thresholds_out = thresholds_path;
    if (!plot_path.empty()) cfg.plot_data = plot_path;
    if (!sizes.empty()) cfg.sizes = parse_schedule(sizes, "--sizes");
    if (!lengths.empty()) cfg.lengths = parse_schedule(lengths, "--lengths");
    if (!dims.empty()) cfg.dims = parse_schedule(dims, "--dims");
    if (!eps.empty()) cfg.eps = parse_real_list(eps, "--eps");
    if (policy == "max-ent") cfg.policy = TargetPolicy::MaximallyEntangled;
    else if (policy == "cover") cfg.policy = TargetPolicy::WorstCaseCover;
    else throw ConfigError("--policy: expected max-ent or cover, got '" + policy + "'");
    if (kernel == "empty") cfg.kernel_policy = FiniteKernelPolicy::Empty;
    else if (kernel == "full") cfg.kernel_policy = FiniteKernelPolicy::Full;
    else if (kernel == "half") cfg.kernel_policy = FiniteKernelPolicy::Half;
    else throw ConfigError("--kernel-policy: expected empty, full or half, got '" + kernel + "'");
    if (cmd == Command::Entropy && cfg.cut != "half") detail::parse_int(cfg.cut, "--cut");
  } catch (const ValidationError& e) {
    log << "error: " << e.what() << "\n";
    return 2;
  }
  return run(cmd, cfg, out, log);
}

}  // namespace embz::cli
