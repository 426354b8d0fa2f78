// Command-line front door for the 4N-4 phase-retrieval pipeline:
//   gen          write a seeded random polynomial
//   measure      take the 4N-4 intensity measurements (uniform or custom nodes)
//   reconstruct  recover the polynomial from a measurement file
//   roundtrip    seeded measure/reconstruct sweep with a pass/fail report
//   oracle-check compare the algebraic pipeline against brute-force descent
//
// Exit codes: 0 success, 2 usage or format error, 3 measurement data
// inconsistent with any polynomial (the error name is printed to stderr).

#include <cinttypes>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "phaseret/io.hpp"
#include "phaseret/measurement.hpp"
#include "phaseret/oracle.hpp"
#include "phaseret/poly.hpp"
#include "phaseret/reconstruct.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 2;
constexpr int kExitInconsistent = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

phaseret::IndexRange parse_support(const std::string& text, std::size_t n) {
  const auto dots = text.find("..");
  unsigned long lo = 0, hi = 0;
  try {
    if (dots == std::string::npos) {
      lo = hi = std::stoul(text);
    } else {
      lo = std::stoul(text.substr(0, dots));
      hi = std::stoul(text.substr(dots + 2));
    }
  } catch (const std::exception&) {
    throw UsageError("--support expects LO..HI with nonnegative integers");
  }
  if (lo > hi || hi >= n) throw UsageError("--support range must satisfy 0 <= LO <= HI < n");
  return phaseret::IndexRange{lo, hi};
}

int cmd_gen(std::size_t n, std::uint64_t seed, const std::optional<std::string>& support,
            const std::string& out_path) {
  std::optional<phaseret::IndexRange> range;
  if (support) range = parse_support(*support, n);
  const phaseret::Polynomial p =
      phaseret::canonical_phase(phaseret::random_polynomial(n, seed, range));
  phaseret::io::write_json_file(out_path, phaseret::io::to_json(p));
  return kExitOk;
}

int cmd_measure(const std::string& in_path, const std::string& out_path,
                const std::optional<std::string>& nodes_w_path,
                const std::optional<std::string>& nodes_z_path) {
  const phaseret::Polynomial p =
      phaseret::io::polynomial_from_json(phaseret::io::read_json_file(in_path));
  if (nodes_w_path) {
    const phaseret::NodeSet nodes_w =
        phaseret::io::nodeset_from_json(phaseret::io::read_json_file(*nodes_w_path));
    const phaseret::NodeSet nodes_z =
        phaseret::io::nodeset_from_json(phaseret::io::read_json_file(*nodes_z_path));
    const auto gm = phaseret::measure_at_nodes(p, nodes_w, nodes_z);
    phaseret::io::write_json_file(out_path, phaseret::io::to_json(gm));
  } else {
    phaseret::io::write_json_file(out_path, phaseret::io::to_json(phaseret::measure(p)));
  }
  return kExitOk;
}

int cmd_reconstruct(const std::string& in_path, const std::string& out_path, double tol) {
  const phaseret::io::MeasurementFile mf =
      phaseret::io::measurement_from_json(phaseret::io::read_json_file(in_path));
  const phaseret::MeasurementSet ms =
      mf.is_generalized() ? phaseret::resample_to_uniform(mf.to_generalized()) : mf.to_uniform();
  const phaseret::Polynomial q = phaseret::canonical_phase(phaseret::reconstruct(ms, tol));
  phaseret::io::write_json_file(out_path, phaseret::io::to_json(q));
  return kExitOk;
}

int cmd_roundtrip(std::size_t n, std::size_t trials, std::uint64_t seed, double tol) {
  std::printf("roundtrip n=%zu trials=%zu seed=%" PRIu64 " tol=%.3e\n", n, trials, seed, tol);
  phaseret::SplitMix64 gen(seed);
  std::size_t passed = 0;
  double max_rel = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const phaseret::Polynomial p = phaseret::random_polynomial(n, gen.next_u64());
    const phaseret::Polynomial q = phaseret::reconstruct(phaseret::measure(p));
    const double dist = phaseret::global_phase_distance(q, p);
    const double rel = dist / (1.0 + p.norm());
    max_rel = std::max(max_rel, rel);
    const bool ok = rel <= tol;
    passed += ok ? 1 : 0;
    std::printf("trial %4zu  dist %.6e  rel %.6e  %s\n", trial, dist, rel, ok ? "pass" : "FAIL");
  }
  std::printf("max relative distance %.6e (tol %.3e)\n", max_rel, tol);
  const bool all = passed == trials;
  std::printf("RESULT %s %zu/%zu\n", all ? "PASS" : "FAIL", passed, trials);
  return all ? kExitOk : 1;
}

int cmd_oracle_check(std::size_t n, std::size_t trials, std::uint64_t seed, std::size_t restarts) {
  constexpr double kAgreeTol = 1e-4;
  std::printf("oracle-check n=%zu trials=%zu seed=%" PRIu64 " restarts=%zu\n", n, trials, seed,
              restarts);
  phaseret::SplitMix64 gen(seed);
  std::size_t passed = 0;
  double max_rel = 0.0;
  for (std::size_t trial = 0; trial < trials; ++trial) {
    const phaseret::Polynomial p = phaseret::random_polynomial(n, gen.next_u64());
    const phaseret::MeasurementSet ms = phaseret::measure(p);
    const phaseret::Polynomial alg = phaseret::reconstruct(ms);
    const phaseret::BruteForceResult bf =
        phaseret::brute_force_reconstruct(ms, restarts, gen.next_u64());
    const double dist = phaseret::global_phase_distance(alg, bf.q);
    const double rel = dist / (1.0 + p.norm());
    max_rel = std::max(max_rel, rel);
    const bool ok = rel <= kAgreeTol;
    passed += ok ? 1 : 0;
    std::printf("trial %4zu  residual %.6e  dist %.6e  rel %.6e  %s\n", trial, bf.residual, dist,
                rel, ok ? "pass" : "FAIL");
  }
  std::printf("max relative disagreement %.6e (tol %.3e)\n", max_rel, kAgreeTol);
  const bool all = passed == trials;
  std::printf("RESULT %s %zu/%zu\n", all ? "PASS" : "FAIL", passed, trials);
  return all ? kExitOk : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Phase retrieval of complex polynomials from 4N-4 intensity measurements"};
  app.require_subcommand(1);

  std::size_t n = 0, trials = 0, restarts = 16;
  std::uint64_t seed = 0;
  double tol = phaseret::kZeroTolRel;
  std::string in_path, out_path;
  std::optional<std::string> support, nodes_w_path, nodes_z_path;

  CLI::App* gen = app.add_subcommand("gen", "Write a seeded random polynomial JSON file");
  gen->add_option("--n", n, "Ambient dimension N")->required()->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  gen->add_option("--seed", seed, "Generator seed")->default_val(std::uint64_t{0});
  gen->add_option("--support", support, "Restrict nonzero coefficients to LO..HI (inclusive)");
  gen->add_option("-o,--out", out_path, "Output polynomial file")->required();

  CLI::App* measure = app.add_subcommand("measure", "Measure |p| and |p'| intensities");
  measure->add_option("-i,--in", in_path, "Input polynomial file")->required();
  measure->add_option("-o,--out", out_path, "Output measurement file")->required();
  auto* optw = measure->add_option("--nodes-w", nodes_w_path, "Node file for |p| (2N-1 angles)");
  auto* optz = measure->add_option("--nodes-z", nodes_z_path, "Node file for |p'| (2N-3 angles)");
  optw->needs(optz);
  optz->needs(optw);

  CLI::App* reconstruct = app.add_subcommand("reconstruct", "Recover the polynomial from measurements");
  reconstruct->add_option("-i,--in", in_path, "Input measurement file")->required();
  reconstruct->add_option("-o,--out", out_path, "Output polynomial file")->required();
  reconstruct->add_option("--tol", tol, "Relative zero threshold")->default_val(phaseret::kZeroTolRel);

  CLI::App* roundtrip = app.add_subcommand("roundtrip", "Seeded measure/reconstruct sweep");
  roundtrip->add_option("--n", n, "Ambient dimension N")->required()->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  roundtrip->add_option("--trials", trials, "Number of trials")->required()->check(CLI::PositiveNumber);
  roundtrip->add_option("--seed", seed, "Generator seed")->default_val(std::uint64_t{0});
  roundtrip->add_option("--tol", tol, "Relative pass threshold")->default_val(phaseret::kZeroTolRel);

  CLI::App* oracle = app.add_subcommand("oracle-check", "Compare against brute-force descent");
  oracle->add_option("--n", n, "Ambient dimension N (desk scale)")->required()->check(CLI::Range(std::size_t{2}, std::size_t{4}));
  oracle->add_option("--trials", trials, "Number of trials")->required()->check(CLI::PositiveNumber);
  oracle->add_option("--seed", seed, "Generator seed")->default_val(std::uint64_t{0});
  oracle->add_option("--restarts", restarts, "Descent restarts per trial")->default_val(std::size_t{16})->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (gen->parsed()) return cmd_gen(n, seed, support, out_path);
    if (measure->parsed()) return cmd_measure(in_path, out_path, nodes_w_path, nodes_z_path);
    if (reconstruct->parsed()) return cmd_reconstruct(in_path, out_path, tol);
    if (roundtrip->parsed()) return cmd_roundtrip(n, trials, seed, tol);
    if (oracle->parsed()) return cmd_oracle_check(n, trials, seed, restarts);
  } catch (const phaseret::ReconstructionError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitInconsistent;
  } catch (const phaseret::io::FormatError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const UsageError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitUsage;
  }
  return kExitUsage;
}
