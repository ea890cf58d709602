// Command-line front end: stationary distributions, sensitivity matrices,
// perturbation-bound reports, Monte Carlo spot checks, and the hilly
// landscape studies. States are numbered 1..L on the command line and in all
// outputs; numeric output uses shortest round-trip formatting so identical
// inputs give byte-identical files.

#include <CLI11.hpp>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "mcsense/mcsense.hpp"

namespace {

using namespace mcsense;

struct RunConfig {
  int threads = 0;        // 0: resolve from MC_SENSE_THREADS or hardware
  double tol = 1e-12;     // validation tolerance
  std::string output;     // empty: stdout
  std::string format = "text";
};

std::ostream& open_output(const RunConfig& cfg, std::ofstream& file) {
  if (cfg.output.empty()) return std::cout;
  file.open(cfg.output);
  if (!file) fail(ErrorCode::ParseError, "cannot open output file: " + cfg.output);
  return file;
}

StochasticMatrixXd load_stochastic(const std::string& path, double tol) {
  return validate_stochastic(read_matrix_file<double>(path), tol);
}

SubstochasticMatrixXd load_substochastic(const std::string& path, double tol) {
  return validate_substochastic(read_matrix_file<double>(path), tol);
}

Index to_internal(long long user_index, Index dim, const char* what) {
  if (user_index < 1 || user_index > dim)
    fail(ErrorCode::InvalidArgument,
         std::string(what) + " must lie in [1, " + std::to_string(dim) +
             "] (states are 1-based)");
  return Index(user_index - 1);
}

std::string csv_row(const DenseVectorXd& v) {
  std::ostringstream os;
  for (Index k = 0; k < v.size(); ++k) {
    if (k) os << ',';
    os << format_double(v[k]);
  }
  return os.str();
}

void write_heatmap(std::ostream& out, const SensitivityMatrix<double>& q,
                   bool with_alpha_column, double alpha, bool header = true) {
  const Index n = q.q.rows();
  if (header) out << (with_alpha_column ? "alpha,i,j,neg_log_q\n" : "i,j,neg_log_q\n");
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      if (with_alpha_column) out << format_double(alpha) << ',';
      out << (i + 1) << ',' << (j + 1) << ','
          << format_double(-std::log(q.q(i, j))) << '\n';
    }
  if (!q.fallback_columns.empty()) {
    out << "# fallback_columns";
    for (Index j : q.fallback_columns) out << ',' << (j + 1);
    out << '\n';
  }
}

void write_q_csv(std::ostream& out, const SensitivityMatrix<double>& q) {
  const Index n = q.q.rows();
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (j) out << ',';
      if (i != j) out << format_double(q.q(i, j));  // diagonal left blank
    }
    out << '\n';
  }
  if (!q.fallback_columns.empty()) {
    out << "# fallback_columns";
    for (Index j : q.fallback_columns) out << ',' << (j + 1);
    out << '\n';
  }
}

int cmd_stationary(const RunConfig& cfg, const std::string& path) {
  std::ofstream file;
  std::ostream& out = open_output(cfg, file);
  const auto f = load_stochastic(path, cfg.tol);
  const auto dist = stationary_distribution(f);
  if (cfg.format == "text") {
    out << "pi: " << csv_row(dist.pi) << '\n'
        << "residual: " << format_double(dist.residual) << '\n';
  } else if (cfg.format == "mm") {
    DenseMatrixXd column = dist.pi;
    write_matrix_market(out, column);
    out << "% residual " << format_double(dist.residual) << '\n';
  } else {
    out << csv_row(dist.pi) << '\n'
        << "residual," << format_double(dist.residual) << '\n';
  }
  return 0;
}

int cmd_sensitivities(const RunConfig& cfg, const std::string& path,
                      bool oracle, bool heatmap, double alpha) {
  std::ofstream file;
  std::ostream& out = open_output(cfg, file);
  DenseMatrixXd m = read_matrix_file<double>(path);
  if (alpha != 1.0) m *= alpha;
  const auto s = validate_substochastic(m, cfg.tol);
  if (!s.irreducible())
    fail(ErrorCode::Reducible,
         "input matrix is reducible; the sensitivity bound requires an "
         "irreducible lower envelope");
  const auto q = oracle ? q_all_oracle(s) : q_all_fast(s, cfg.threads);
  if (heatmap)
    write_heatmap(out, q, /*with_alpha_column=*/false, alpha);
  else
    write_q_csv(out, q);
  return 0;
}

void print_report_text(std::ostream& out, const BoundReport<double>& report) {
  out << "true_error: " << format_double(report.true_error) << '\n';
  out << "log_form_bound: " << format_double(report.log_form) << '\n';
  out << "linear_form_bound: " << format_double(report.linear_form) << '\n';
  out << "ocinneide_bound: "
      << (report.ocinneide ? format_double(*report.ocinneide)
                           : std::string("absent"))
      << '\n';
  out << "cho_meyer_bound: " << format_double(report.cho_meyer_bound) << '\n';
  out << "ipsen_meyer_kappa: " << csv_row(report.ipsen_meyer) << '\n';
  out << "q_source: " << (report.q_source == QSource::Fast ? "fast" : "oracle")
      << '\n';
}

void print_report_csv(std::ostream& out, const BoundReport<double>& report) {
  out << "metric,index,value\n";
  out << "true_error,," << format_double(report.true_error) << '\n';
  out << "log_form_bound,," << format_double(report.log_form) << '\n';
  out << "linear_form_bound,," << format_double(report.linear_form) << '\n';
  out << "ocinneide_bound,,"
      << (report.ocinneide ? format_double(*report.ocinneide)
                           : std::string("absent"))
      << '\n';
  out << "cho_meyer_bound,," << format_double(report.cho_meyer_bound) << '\n';
  for (Index i = 0; i < report.ipsen_meyer.size(); ++i)
    out << "ipsen_meyer_kappa," << (i + 1) << ','
        << format_double(report.ipsen_meyer[i]) << '\n';
  out << "q_source,," << (report.q_source == QSource::Fast ? "fast" : "oracle")
      << '\n';
}

int cmd_bounds(const RunConfig& cfg, const std::string& f_path,
               const std::string& ft_path, const std::string& s_path,
               const std::string& alpha_path, bool oracle) {
  std::ofstream file;
  std::ostream& out = open_output(cfg, file);
  const auto f = load_stochastic(f_path, cfg.tol);
  const auto ftilde = load_stochastic(ft_path, cfg.tol);
  std::optional<SubstochasticMatrixXd> envelope;
  if (!s_path.empty()) {
    envelope = load_substochastic(s_path, cfg.tol);
  } else if (!alpha_path.empty()) {
    envelope = lower_envelope(ftilde, read_matrix_file<double>(alpha_path));
  }
  const auto report =
      make_bound_report(f, ftilde, std::move(envelope),
                        oracle ? QSource::Oracle : QSource::Fast, cfg.threads);
  if (cfg.format == "csv")
    print_report_csv(out, report);
  else
    print_report_text(out, report);
  return 0;
}

int cmd_verify(const RunConfig& cfg, const std::string& path, long long i_user,
               long long j_user, long long n, std::uint64_t seed,
               const std::string& what, long long m_user) {
  std::ofstream file;
  std::ostream& out = open_output(cfg, file);
  const auto s = load_substochastic(path, cfg.tol);
  const Index i = to_internal(i_user, s.dim(), "i");
  const Index j = to_internal(j_user, s.dim(), "j");
  out << "quantity,point,stderr,n,seed,deterministic,abs_z\n";
  auto row = [&out](const std::string& name, const McEstimate& est,
                    double exact) {
    const double z =
        est.stderr_ > 0 ? std::abs(est.point - exact) / est.stderr_ : 0.0;
    out << name << ',' << format_double(est.point) << ','
        << format_double(est.stderr_) << ',' << est.n << ',' << est.seed << ','
        << format_double(exact) << ',' << format_double(z) << '\n';
  };
  if (what == "q") {
    const auto est = estimate_q(s, i, j, n, seed, cfg.threads);
    row("q", est, q_single(s, i, j));
  } else if (what == "occupation") {
    if (!s.irreducible())
      fail(ErrorCode::Reducible, "occupation check requires an irreducible chain");
    const auto f = validate_stochastic(s.matrix(), cfg.tol);
    const Index m = to_internal(m_user, s.dim(), "count state (--m)");
    const auto est = estimate_occupation(f, j, i, m, n, seed, cfg.threads);
    const auto occ = occupation_matrix(f, i);
    const double exact =
        (m == i) ? 0.0 : occ.n(occ.from_parent(j), occ.from_parent(m));
    row("occupation", est, exact);
  } else if (what == "decomposition") {
    const auto f = validate_stochastic(s.matrix(), cfg.tol);
    const auto [lhs, rhs] = check_decomposition(f, i, j, n, seed, cfg.threads);
    const auto stats = passage_stats(f, i);
    const double exact = stats.hit_before_return[j] * stats.expected_hit[j];
    row("decomposition_lhs", lhs, exact);
    row("decomposition_rhs", rhs, exact);
  } else {
    fail(ErrorCode::InvalidArgument,
         "--what must be one of q, occupation, decomposition");
  }
  return 0;
}

int cmd_hilly(const RunConfig& cfg, const std::vector<long long>& lengths,
              const std::vector<double>& alphas, const std::string& study,
              const std::string& out_dir, bool oracle) {
  if (study == "gap") {
    std::ofstream file;
    std::ostream& out = open_output(cfg, file);
    std::vector<Index> ls(lengths.begin(), lengths.end());
    const auto rows = gap_scaling_study<double>(ls);
    out << "L,gamma,log_inv_gamma,phi,eigen_min,cond_proxy\n";
    for (const auto& r : rows)
      out << r.length << ',' << format_double(r.gamma) << ','
          << format_double(r.log_inv_gamma) << ','
          << format_double(r.bottleneck) << ',' << format_double(r.eigen_min)
          << ',' << format_double(r.cond_proxy) << '\n';
    return 0;
  }

  if (lengths.size() != 1)
    fail(ErrorCode::InvalidArgument,
         "study '" + study + "' takes exactly one --L value");
  if (!out_dir.empty() && !std::filesystem::is_directory(out_dir))
    fail(ErrorCode::ParseError, "--out-dir is not a directory: " + out_dir);
  const Index length = Index(lengths.front());
  const auto chain = hilly_matrix(HillyConfig<double>::standard(length));

  if (study == "heatmap") {
    std::ofstream single;
    std::ostream* out = out_dir.empty() ? &open_output(cfg, single) : nullptr;
    bool wrote_header = false;
    for (double alpha : alphas) {
      DenseMatrixXd scaled = alpha * chain.transition.matrix();
      const auto s = validate_substochastic(scaled, cfg.tol);
      const auto q = oracle ? q_all_oracle(s) : q_all_fast(s, cfg.threads);
      if (!out_dir.empty()) {
        const std::string name = "heatmap_L" + std::to_string(length) +
                                 "_alpha" + format_double(alpha) + ".csv";
        std::ofstream file(std::filesystem::path(out_dir) / name);
        if (!file)
          fail(ErrorCode::ParseError, "cannot open output file in " + out_dir);
        write_heatmap(file, q, /*with_alpha_column=*/false, alpha);
      } else {
        write_heatmap(*out, q, /*with_alpha_column=*/true, alpha, !wrote_header);
        wrote_header = true;
      }
    }
    return 0;
  }

  if (study == "floors") {
    std::ofstream file;
    std::ostream& out = open_output(cfg, file);
    out << "alpha,i,j,q,floor\n";
    long violations = 0;
    for (double alpha : alphas) {
      DenseMatrixXd scaled = alpha * chain.transition.matrix();
      const auto s = validate_substochastic(scaled, cfg.tol);
      const auto q = q_all_fast(s, cfg.threads);
      for (Index i = 0; i < length; ++i)
        for (Index j = 0; j < length; ++j) {
          if (i == j) continue;
          const double floor = random_walk_floor(alpha, i, j, length);
          if (q.q(i, j) < floor) {
            ++violations;
            out << format_double(alpha) << ',' << (i + 1) << ',' << (j + 1)
                << ',' << format_double(q.q(i, j)) << ','
                << format_double(floor) << '\n';
          }
        }
    }
    out << "violations," << violations << '\n';
    return violations == 0 ? 0 : 1;
  }

  fail(ErrorCode::InvalidArgument, "--study must be one of gap, heatmap, floors");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Invariant distributions of finite Markov chains, entrywise "
               "sensitivities, and sharp relative-error perturbation bounds"};
  app.require_subcommand(1);
  app.fallthrough();  // --threads / --tol may follow the subcommand
  app.failure_message([](const CLI::App* a, const CLI::Error& e) {
    return "error[Usage]: " + CLI::FailureMessage::simple(a, e);
  });

  RunConfig cfg;
  app.add_option("--threads", cfg.threads,
                 "worker threads (default: MC_SENSE_THREADS or hardware)");
  app.add_option("--tol", cfg.tol, "row-sum validation tolerance")
      ->capture_default_str();

  std::string matrix_path, second_path, s_path, alpha_path;
  bool oracle = false, fast = false, heatmap = false, auto_min = false;
  double alpha = 1.0;
  long long i_user = 0, j_user = 0, m_user = 0, n = 0;
  std::uint64_t seed = 0;
  std::string what = "q", study, out_dir;
  std::vector<long long> lengths;
  std::vector<double> alphas{1.0};

  auto* sub_stationary =
      app.add_subcommand("stationary", "invariant distribution of a chain");
  sub_stationary->add_option("matrix", matrix_path, "transition matrix file")
      ->required();
  sub_stationary->add_option("-o,--output", cfg.output, "output file");
  sub_stationary
      ->add_option("--format", cfg.format, "output format: text, csv, mm")
      ->check(CLI::IsMember({"text", "csv", "mm"}))
      ->capture_default_str();

  auto* sub_sens = app.add_subcommand(
      "sensitivities", "sensitivity matrix Q of a substochastic envelope");
  sub_sens->add_option("matrix", matrix_path, "substochastic matrix file")
      ->required();
  auto* flag_oracle =
      sub_sens->add_flag("--oracle", oracle, "per-pair oracle solves");
  sub_sens->add_flag("--fast", fast, "rank-two update algorithm (default)")
      ->excludes(flag_oracle);
  sub_sens->add_flag("--heatmap", heatmap, "emit i,j,-log Q triples");
  sub_sens->add_option("--alpha", alpha, "scale the input matrix by alpha")
      ->capture_default_str();
  sub_sens->add_option("-o,--output", cfg.output, "output file");

  auto* sub_bounds =
      app.add_subcommand("bounds", "perturbation bound report for F, Ftilde");
  sub_bounds->add_option("F", matrix_path, "exact transition matrix")->required();
  sub_bounds->add_option("Ftilde", second_path, "perturbed transition matrix")
      ->required();
  auto* opt_s = sub_bounds->add_option("--S", s_path, "lower envelope matrix");
  auto* opt_alpha = sub_bounds
                        ->add_option("--alpha", alpha_path,
                                     "entrywise error budget matrix file")
                        ->excludes(opt_s);
  sub_bounds
      ->add_flag("--auto-min", auto_min,
                 "use the entrywise minimum of F and Ftilde (default)")
      ->excludes(opt_s)
      ->excludes(opt_alpha);
  sub_bounds->add_flag("--oracle", oracle, "compute Q by the per-pair oracle");
  sub_bounds->add_option("-o,--output", cfg.output, "output file");
  sub_bounds->add_option("--format", cfg.format, "output format: text, csv")
      ->check(CLI::IsMember({"text", "csv"}))
      ->capture_default_str();

  auto* sub_verify = app.add_subcommand(
      "verify", "Monte Carlo vs deterministic comparison for one quantity");
  sub_verify->add_option("matrix", matrix_path, "matrix file")->required();
  sub_verify->add_option("i", i_user, "state i (1-based)")->required();
  sub_verify->add_option("j", j_user, "state j (1-based)")->required();
  sub_verify->add_option("--n", n, "number of trajectories")
      ->required()
      ->check(CLI::PositiveNumber);
  sub_verify->add_option("--seed", seed, "RNG seed")->capture_default_str();
  sub_verify
      ->add_option("--what", what, "quantity: q, occupation, decomposition")
      ->check(CLI::IsMember({"q", "occupation", "decomposition"}))
      ->capture_default_str();
  sub_verify->add_option("--m", m_user,
                         "counted state for --what occupation (1-based)");
  sub_verify->add_option("-o,--output", cfg.output, "output file");

  auto* sub_hilly =
      app.add_subcommand("hilly", "energy-landscape benchmark studies");
  sub_hilly->add_option("--L", lengths, "chain sizes (even)")
      ->required()
      ->delimiter(',');
  sub_hilly->add_option("--alpha-list", alphas, "envelope scales")
      ->delimiter(',');
  sub_hilly->add_option("--study", study, "study: gap, heatmap, floors")
      ->required()
      ->check(CLI::IsMember({"gap", "heatmap", "floors"}));
  sub_hilly->add_option("--out-dir", out_dir, "directory for per-alpha files");
  sub_hilly->add_flag("--oracle", oracle, "use the per-pair oracle for Q");
  sub_hilly->add_option("-o,--output", cfg.output, "output file");

  CLI11_PARSE(app, argc, argv);

  try {
    cfg.threads = resolve_threads(cfg.threads);
    if (sub_stationary->parsed()) return cmd_stationary(cfg, matrix_path);
    if (sub_sens->parsed())
      return cmd_sensitivities(cfg, matrix_path, oracle, heatmap, alpha);
    if (sub_bounds->parsed())
      return cmd_bounds(cfg, matrix_path, second_path, s_path, alpha_path,
                        oracle);
    if (sub_verify->parsed())
      return cmd_verify(cfg, matrix_path, i_user, j_user, n, seed, what, m_user);
    if (sub_hilly->parsed())
      return cmd_hilly(cfg, lengths, alphas, study, out_dir, oracle);
  } catch (const mcsense::Error& e) {
    std::cerr << "error[" << e.code_name() << "]: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error[Internal]: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
