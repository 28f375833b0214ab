#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "cplx1/increment.hpp"
#include "cplx1/linsys.hpp"
#include "cplx1/patterns.hpp"
#include "cplx1/primes.hpp"
#include "cplx1/sieve.hpp"

using json = nlohmann::ordered_json;
using namespace cplx1;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// print, and also drop a copy under CPLX1_OUTPUT_DIR when that is set
void emit(const std::string& name, const std::string& content) {
  std::cout << content;
  const char* dir = std::getenv("CPLX1_OUTPUT_DIR");
  if (!dir || !*dir) return;
  std::string path = std::string(dir) + "/" + name;
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write to " + path);
  out << content;
}

increment::Constants constants_from(const std::string& path) {
  if (path.empty()) return increment::Constants{};
  return increment::load_constants(slurp(path));
}

json complexity_json(const std::optional<int>& c) {
  if (!c) return "infinite";
  return *c;
}

json system_json(const linsys::LinearSystem& psi) {
  json rows = json::array();
  for (int i = 0; i < psi.t; ++i) {
    json row = json::array();
    for (int j = 0; j < psi.d; ++j) row.push_back(psi.c(i, j).convert_to<std::int64_t>());
    rows.push_back(row);
  }
  return rows;
}

int cmd_analyze(const std::string& matrix_path, const std::string& out_format) {
  linsys::IntMatrix V = linsys::parse_matrix(slurp(matrix_path));
  json out;
  out["rows"] = V.rows;
  out["cols"] = V.cols;
  out["translation_invariant"] = linsys::is_translation_invariant(V);
  out["rank"] = linsys::rank(V);
  out["norm"] = linsys::matrix_norm(V).convert_to<std::int64_t>();
  json per_index = json::array();
  bool finite = true;
  int global = 0;
  for (int i = 0; i < V.cols; ++i) {
    auto ci = linsys::matrix_complexity_at(V, i);
    per_index.push_back(complexity_json(ci));
    if (!ci) finite = false;
    else global = std::max(global, *ci);
  }
  out["complexity_at"] = per_index;
  out["complexity"] = finite ? json(global) : json("infinite");
  if (out["translation_invariant"] == true && out["rank"] == V.rows && finite) {
    linsys::KernelParam kp = linsys::kernel_parametrization(V, std::max(global, 1));
    out["parametrization"] = system_json(kp.psi);
    out["parametrization_norm"] = linsys::linear_norm(kp.psi).convert_to<std::int64_t>();
    out["shifted_parametrization"] = system_json(kp.phi);
    json wits = json::array();
    for (const auto& w : kp.witness) wits.push_back(w);
    out["normal_witnesses"] = wits;
  }
  if (out_format == "human") {
    std::ostringstream human;
    human << "matrix " << V.rows << "x" << V.cols << ", complexity " << out["complexity"].dump() << "\n";
    emit("analyze.txt", human.str());
  } else {
    emit("analyze.json", out.dump(2) + "\n");
  }
  return 0;
}

int cmd_gpy(std::int64_t N, double omega, std::int64_t b, double eta, double L,
            const std::string& system_path, std::int64_t samples, std::uint64_t seed,
            const std::string& out_format) {
  sieve::WTrickContext ctx = sieve::make_context(N, omega, b);
  sieve::GpyConfig cfg = sieve::make_config(N, eta, L);
  sieve::GpyEvaluator ev(ctx, cfg);
  sieve::SieveFactor c2 = sieve::sieve_factor_c2();

  std::vector<std::pair<std::string, linsys::LinearSystem>> systems;
  if (!system_path.empty()) {
    systems.emplace_back(system_path, linsys::parse_system(slurp(system_path)));
  } else {
    systems.emplace_back("identity", linsys::LinearSystem::from_rows({{1}}));
    systems.emplace_back("ap3", linsys::LinearSystem::from_rows({{1, 0}, {1, 1}, {1, 2}}));
  }

  json out;
  out["N"] = N;
  out["omega"] = omega;
  out["b"] = b;
  out["eta"] = eta;
  out["R"] = cfg.R;
  out["W"] = ctx.w64;
  out["h"] = ev.h;
  out["sieve_factor"] = {{"quadrature", c2.quadrature}, {"derivative", c2.derivative},
                         {"difference", c2.difference}};
  json table = json::array();
  std::ostringstream csv;
  csv.precision(12);
  csv << "system,P,samples,mean,stderr,deviation\n";
  for (auto& [name, psi] : systems) {
    auto res = sieve::correlation_harness(psi, N, ev, samples, seed);
    json row;
    row["system"] = name;
    row["mean"] = res.mean;
    row["stderr"] = res.stderr_;
    row["deviation"] = res.deviation;
    row["samples"] = res.samples;
    row["exhaustive"] = res.exhaustive;
    table.push_back(row);
    csv << name << ',' << N << ',' << res.samples << ',' << res.mean << ',' << res.stderr_ << ','
        << res.deviation << "\n";
  }
  out["correlations"] = table;
  // spot checks of the local probabilities for the first system
  json locals = json::array();
  for (std::int64_t p : {2, 3, 5, 7, 11}) {
    auto tab = sieve::local_factor_table(p, systems.front().second, ctx);
    json row;
    row["p"] = p;
    row["alpha_first_form"] = to_double(tab.by_forms[1]);
    locals.push_back(row);
  }
  out["local_spot_checks"] = locals;
  if (out_format == "csv") emit("gpy.csv", csv.str());
  else emit("gpy.json", out.dump(2) + "\n");
  return 0;
}

int cmd_count(const std::string& matrix_path, const std::string& set_path, bool distinct) {
  linsys::IntMatrix V = linsys::parse_matrix(slurp(matrix_path));
  std::vector<std::int64_t> A = patterns::parse_set(slurp(set_path));
  json out;
  out["matrix"] = matrix_path;
  out["set_size"] = A.size();
  out["distinct"] = distinct;
  std::int64_t count = distinct ? patterns::count_distinct_solutions(V, A) : patterns::count_solutions(V, A);
  out["count"] = count;
  out["method"] = "lattice";
  out["budget_used"] = static_cast<std::int64_t>(
      std::pow(static_cast<double>(A.size()), V.cols - linsys::rank(V)));
  emit("count.json", out.dump(2) + "\n");
  return 0;
}

json steps_json(const increment::IncrementRun& run) {
  json steps = json::array();
  for (const auto& s : run.steps) {
    json row;
    row["step"] = s.step;
    row["alpha"] = s.alpha;
    row["dim"] = s.dim;
    row["delta"] = s.delta;
    row["set_size"] = s.set_size;
    row["bohr_size"] = s.bohr_size;
    row["action"] = s.action;
    row["T_indicator"] = s.T_indicator;
    row["u"] = s.u;
    row["m"] = s.m;
    steps.push_back(row);
  }
  return steps;
}

int cmd_increment(const std::string& matrix_path, const std::string& set_path, std::int64_t N,
                  const std::string& constants_path) {
  linsys::IntMatrix V = linsys::parse_matrix(slurp(matrix_path));
  std::vector<std::int64_t> A = patterns::parse_set(slurp(set_path));
  if (N == 0)
    for (std::int64_t a : A) N = std::max<std::int64_t>(N, std::llabs(a));
  increment::Constants consts = constants_from(constants_path);
  increment::IncrementRun run = increment::run_increment(V, A, N, consts);
  json out;
  out["N"] = N;
  out["modulus"] = run.M;
  out["many_patterns"] = run.many_patterns;
  out["steps_taken"] = run.steps_taken;
  out["step_budget"] = run.step_budget;
  out["configs"] = run.configs.str();
  out["multiplicity_bound"] = run.mult_bound.str();
  out["solutions_lower_bound"] = run.solutions_bound.str();
  out["closedform_exponent"] = run.closedform_exponent;
  out["u_total"] = run.u_total;
  out["m_total"] = run.m_total;
  out["steps"] = steps_json(run);
  emit("increment.json", out.dump(2) + "\n");
  return 0;
}

int cmd_transfer(const std::string& matrix_path, std::int64_t N, double omega, std::int64_t b, double eta,
                 double delta, double eps, const std::string& constants_path) {
  linsys::IntMatrix V = linsys::parse_matrix(slurp(matrix_path));
  sieve::WTrickContext ctx = sieve::make_context(N, omega, b);
  sieve::GpyConfig cfg = sieve::make_config(N, eta);
  std::vector<std::int64_t> A;
  for (std::int64_t n = 1; n <= N; ++n)
    if (is_prime(ctx.w64 * n + ctx.b)) A.push_back(n);
  increment::Constants consts = constants_from(constants_path);
  increment::TransferenceReport rep = increment::transference_pipeline(V, A, ctx, cfg, delta, eps, consts);
  json out;
  out["N"] = N;
  out["omega"] = omega;
  out["b"] = b;
  out["modulus"] = rep.M;
  out["tricked_primes"] = A.size();
  out["alpha"] = rep.alpha;
  out["T_lambda"] = rep.T_lambda;
  out["T_smooth"] = rep.T_smooth;
  out["error_sum"] = rep.error_sum;
  out["error_terms"] = rep.error_terms;
  out["gvn_rhs"] = rep.gvn_rhs;
  out["gvn_weighted"] = {{"lhs", rep.gvn_weighted_lhs},
                         {"rhs", rep.gvn_weighted_rhs},
                         {"scale", rep.gvn_scale}};
  out["identity_residual"] = rep.identity_residual;
  out["u2_distance"] = rep.u2_distance;
  out["u2_budget"] = rep.u2_budget;
  out["bohr_set"] = {{"M", rep.M},
                     {"gamma", rep.bohr_gamma},
                     {"delta", rep.bohr_delta},
                     {"elements_count", rep.bohr_size},
                     {"regular", rep.bohr_regular}};
  out["levelset_density"] = rep.levelset_density;
  out["weight_mean"] = rep.weight_report.mean;
  out["weight_lf_averages"] = rep.weight_report.lf_averages;
  out["bad_box_fraction"] = rep.weight_report.bad_box_fraction;
  out["bad_box_bound"] = rep.weight_report.bad_box_bound;
  out["mainterm"] = {{"many_patterns", rep.mainterm.many_patterns},
                     {"configs", rep.mainterm.configs.str()},
                     {"solutions_lower_bound", rep.mainterm.solutions_bound.str()},
                     {"steps", steps_json(rep.mainterm)}};
  out["solutions"] = rep.solutions;
  out["distinct_solutions"] = rep.distinct_solutions;
  emit("transfer.json", out.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"translation-invariant systems of complexity one: analysis, sieve weights, counting, increments"};
  app.require_subcommand(1);

  std::string matrix_path, set_path, system_path, constants_path;
  std::string out_format = "json";
  std::int64_t N = 10000, b = 1, samples = 200000;
  double omega = 5, eta = 0.05, L = 30, delta = 0.1, eps = 0.05;
  std::uint64_t seed = 1;
  bool distinct = false;
  int threads = 1;
  app.add_option("--threads", threads, "worker cap (reserved; computations are deterministic)");

  auto* analyze = app.add_subcommand("analyze", "complexity, normal forms, kernel parametrization");
  analyze->add_option("--matrix", matrix_path, "matrix file")->required();
  analyze->add_option("--format", out_format, "json|human");

  auto* gpy = app.add_subcommand("gpy", "divisor-sum weight experiments");
  gpy->add_option("--N", N, "scale");
  gpy->add_option("--omega", omega, "small-prime cutoff");
  gpy->add_option("--b", b, "residue");
  gpy->add_option("--eta", eta, "truncation exponent");
  gpy->add_option("--L", L, "frequency truncation");
  gpy->add_option("--system", system_path, "system file (default: identity and 3-term patterns)");
  gpy->add_option("--samples", samples, "sample budget");
  gpy->add_option("--seed", seed, "sampling seed");
  gpy->add_option("--format", out_format, "json|csv");

  auto* count = app.add_subcommand("count", "exact solution counts over a set");
  count->add_option("--matrix", matrix_path, "matrix file")->required();
  count->add_option("--set", set_path, "set file (one integer per line)")->required();
  count->add_flag("--distinct", distinct, "require pairwise-distinct coordinates");

  auto* incr = app.add_subcommand("increment", "density-increment run over an integer set");
  incr->add_option("--matrix", matrix_path, "matrix file")->required();
  incr->add_option("--set", set_path, "set file")->required();
  incr->add_option("--N", N, "box radius (default: max |a|)");
  incr->add_option("--constants", constants_path, "iteration constants file");

  auto* transfer = app.add_subcommand("transfer", "full pipeline over tricked primes");
  transfer->add_option("--matrix", matrix_path, "matrix file")->required();
  transfer->add_option("--N", N, "scale");
  transfer->add_option("--omega", omega, "small-prime cutoff");
  transfer->add_option("--b", b, "residue");
  transfer->add_option("--eta", eta, "truncation exponent");
  transfer->add_option("--delta", delta, "spectral threshold");
  transfer->add_option("--eps", eps, "Bohr radius");
  transfer->add_option("--constants", constants_path, "iteration constants file");

  CLI11_PARSE(app, argc, argv);

  try {
    if (analyze->parsed()) return cmd_analyze(matrix_path, out_format);
    if (gpy->parsed()) return cmd_gpy(N, omega, b, eta, L, system_path, samples, seed, out_format);
    if (count->parsed()) return cmd_count(matrix_path, set_path, distinct);
    if (incr->parsed()) return cmd_increment(matrix_path, set_path, incr->count("--N") ? N : 0, constants_path);
    if (transfer->parsed()) return cmd_transfer(matrix_path, N, omega, b, eta, delta, eps, constants_path);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return 1;
  } catch (const BudgetError& e) {
    std::cerr << "budget error: " << e.what() << "\n";
    return 2;
  } catch (const CertificationError& e) {
    std::cerr << "certification error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
