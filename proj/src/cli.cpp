#include "genlik/cli.hpp"

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <set>
#include <sstream>
#include <thread>

#include "genlik/analytic.hpp"
#include "genlik/constrained.hpp"
#include "genlik/em.hpp"
#include "genlik/errors.hpp"
#include "genlik/experiments.hpp"
#include "genlik/grid.hpp"
#include "genlik/io.hpp"
#include "genlik/likelihood.hpp"
#include "genlik/majorize.hpp"

namespace genlik {

namespace {

const char* kUsage =
    "usage: genlik <subcommand> [--key value ...] [--config FILE]\n"
    "subcommands:\n"
    "  eval          L_beta of a stored grid        --grid FILE [--py LIST] [--beta B]\n"
    "  em            generalized EM on a family     --family discrete --z Z [--theta0 LIST]\n"
    "  solve-avg     known-average maximizer        --py LIST --score S --target E [--beta B]\n"
    "  solve-two     marginal+average maximizer     --py LIST --score S --target E [--beta B]\n"
    "  gibbs-limit   beta->1 limit solution         --py LIST --score S --target E\n"
    "  discrete      binary-model solution          --z Z [--beta B]\n"
    "  continuous    continuous-model solution      --chi C [--beta B] [--cap H]\n"
    "  maximin-demo  maximin estimator profiles\n"
    "  majorize      greedy sparse maximizer        --py LIST [--px LIST] [--n N --m M]\n"
    "  d1d2          table of D1/D2/K1/K2           --n N --m M --score S --S COUNT\n"
    "  d3            averaged-guess comparison      --n N --m M --score S --S COUNT --M COUNT\n"
    "  fig1          marginal-recovery sweep        [--py LIST --score S --targets K]\n"
    "  maxent-study  constraint-relevance table     [--n N --M-list LIST --samples K --draws K]\n"
    "common flags: --seed N --beta B --out FILE --format csv|jsonl --threads N --config FILE\n";

const std::set<std::string> kCommonKeys = {"seed",    "beta", "out",
                                           "format",  "threads"};

const std::map<std::string, std::set<std::string>>& subcommand_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"eval", {"grid", "py"}},
      {"em", {"family", "z", "theta0", "max-iters", "delta-tol"}},
      {"solve-avg", {"py", "score", "target"}},
      {"solve-two", {"py", "score", "target"}},
      {"gibbs-limit", {"py", "score", "target"}},
      {"discrete", {"z"}},
      {"continuous", {"chi", "cap"}},
      {"maximin-demo", {}},
      {"majorize", {"py", "px", "n", "m"}},
      {"d1d2", {"n", "m", "score", "S"}},
      {"d3", {"n", "m", "score", "S", "M"}},
      {"fig1", {"py", "score", "beta-list", "targets"}},
      {"maxent-study", {"n", "z-list", "M-list", "samples", "draws"}},
  };
  return keys;
}

double parse_double(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": not a number: '" + value + "'");
  }
}

long parse_long(const std::string& key, const std::string& value) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(value, &pos);
    if (pos != value.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw UsageError("--" + key + ": not an integer: '" + value + "'");
  }
}

std::vector<double> parse_list(const std::string& key, const std::string& value) {
  std::vector<double> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw UsageError("--" + key + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ','))
    out.push_back(static_cast<int>(parse_long(key, item)));
  if (out.empty()) throw UsageError("--" + key + ": empty list");
  return out;
}

}  // namespace

RunConfig parse_config(const std::vector<std::string>& argv) {
  if (argv.empty()) throw UsageError("missing subcommand");
  RunConfig config;
  config.subcommand = argv[0];
  const auto& table = subcommand_keys();
  const auto it = table.find(config.subcommand);
  if (it == table.end())
    throw UsageError("unknown subcommand '" + config.subcommand + "'");
  const std::set<std::string>& allowed = it->second;

  std::map<std::string, std::string> file_entries;
  std::map<std::string, std::string> flag_entries;
  std::string config_path;

  for (std::size_t i = 1; i < argv.size(); ++i) {
    std::string token = argv[i];
    if (token.rfind("--", 0) != 0)
      throw UsageError("expected --key, got '" + token + "'");
    token.erase(0, 2);
    std::string value;
    const std::size_t eq = token.find('=');
    if (eq != std::string::npos) {
      value = token.substr(eq + 1);
      token.erase(eq);
    } else {
      if (i + 1 >= argv.size())
        throw UsageError("--" + token + ": missing value");
      value = argv[++i];
    }
    if (token == "config")
      config_path = value;
    else
      flag_entries[token] = value;
  }

  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw UsageError("cannot open config file: " + config_path);
    std::string line;
    while (std::getline(is, line)) {
      const std::size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      const std::size_t eq = line.find('=');
      if (eq == std::string::npos) {
        if (line.find_first_not_of(" \t\r") != std::string::npos)
          throw UsageError("config file: bad line: " + line);
        continue;
      }
      const auto trim = [](std::string s) {
        const std::size_t a = s.find_first_not_of(" \t\r");
        const std::size_t b = s.find_last_not_of(" \t\r");
        return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
      };
      file_entries[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
  }

  // flags win over the config file
  std::map<std::string, std::string> merged = std::move(file_entries);
  for (const auto& [k, v] : flag_entries) merged[k] = v;

  for (const auto& [key, value] : merged) {
    if (key == "seed") {
      const long s = parse_long(key, value);
      if (s < 0) throw UsageError("--seed: must be nonnegative");
      config.seed = static_cast<std::uint64_t>(s);
    } else if (key == "beta") {
      config.beta = parse_double(key, value);
      if (!(config.beta > 0.0)) throw UsageError("--beta: must be > 0");
    } else if (key == "out") {
      config.out = value;
    } else if (key == "format") {
      if (value != "csv" && value != "jsonl")
        throw UsageError("--format: expected csv or jsonl");
      config.format = value;
    } else if (key == "threads") {
      const long t = parse_long(key, value);
      if (t < 1) throw UsageError("--threads: must be >= 1");
      config.threads = static_cast<int>(t);
    } else if (allowed.count(key)) {
      config.params[key] = value;
    } else {
      throw UsageError("unknown key '--" + key + "' for subcommand " +
                       config.subcommand);
    }
  }

  // per-operation numeric preconditions
  const auto check_positive_int = [&](const char* key) {
    if (config.params.count(key) && parse_long(key, config.params.at(key)) < 1)
      throw UsageError(std::string("--") + key + ": must be >= 1");
  };
  check_positive_int("S");
  check_positive_int("M");
  check_positive_int("n");
  check_positive_int("m");
  check_positive_int("samples");
  check_positive_int("draws");
  check_positive_int("targets");
  if (config.subcommand == "solve-avg" || config.subcommand == "solve-two") {
    if (!(config.beta < 1.0))
      throw UsageError("--beta: this solver requires beta in (0,1)");
  }
  if (config.params.count("z")) {
    const double z = parse_double("z", config.params.at("z"));
    if (config.subcommand == "discrete" && !(z > 0.0 && z < 1.0))
      throw UsageError("--z: must be in (0,1)");
  }
  if (config.params.count("chi") &&
      !(parse_double("chi", config.params.at("chi")) > 0.0))
    throw UsageError("--chi: must be > 0");
  return config;
}

namespace {

int effective_threads(const RunConfig& config) {
  if (config.threads > 0) return config.threads;
  if (const char* env = std::getenv("GENLIK_THREADS")) {
    const int t = std::atoi(env);
    if (t >= 1) return t;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

std::string require(const RunConfig& config, const std::string& key) {
  const auto it = config.params.find(key);
  if (it == config.params.end())
    throw UsageError("subcommand " + config.subcommand + " requires --" + key);
  return it->second;
}

std::string optional_or(const RunConfig& config, const std::string& key,
                        const std::string& fallback) {
  const auto it = config.params.find(key);
  return it == config.params.end() ? fallback : it->second;
}

// Either a builtin score name or a CSV path with header x,y,E.
std::vector<double> load_score(const std::string& spec, int n, int m) {
  if (spec == "abs-diff" || spec == "product") return builtin_score(spec, n, m);
  std::ifstream is(spec);
  if (!is) throw UsageError("--score: not a builtin name and not a readable file: " + spec);
  std::string line;
  if (!std::getline(is, line) || line.rfind("x,y,E", 0) != 0)
    throw Error("score CSV: missing x,y,E header");
  std::vector<double> score(static_cast<std::size_t>(n) * m, 0.0);
  std::vector<char> seen(score.size(), 0);
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    int x = 0, y = 0;
    char c1 = 0, c2 = 0;
    double v = 0.0;
    if (!(row >> x >> c1 >> y >> c2 >> v) || c1 != ',' || c2 != ',')
      throw Error("score CSV: bad row: " + line);
    if (x < 0 || x >= n || y < 0 || y >= m)
      throw Error("score CSV: cell out of range");
    score[static_cast<std::size_t>(x) * m + y] = v;
    seen[static_cast<std::size_t>(x) * m + y] = 1;
  }
  for (char s : seen)
    if (!s) throw Error("score CSV: missing cell");
  return score;
}

// one output sink per artifact: --out path or stdout
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Error("cannot open for writing: " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::string json_bool(bool b) { return b ? "true" : "false"; }

void emit_grid(const RunConfig& config, std::ostream& os,
               const FiniteJoint& joint, const char* value_key) {
  if (config.format == "jsonl") {
    for (int x = 0; x < joint.n(); ++x)
      for (int y = 0; y < joint.m(); ++y)
        os << "{\"x\":" << x << ",\"y\":" << y << ",\"" << value_key
           << "\":" << fmt17(joint(x, y)) << "}\n";
  } else {
    os << "x,y," << value_key << '\n';
    for (int x = 0; x < joint.n(); ++x)
      for (int y = 0; y < joint.m(); ++y)
        os << x << ',' << y << ',' << fmt17(joint(x, y)) << '\n';
  }
}

// sidecar record for Lagrange solutions: derived file next to --out, or
// a blank-line-separated section on stdout
void emit_sidecar(const RunConfig& config, const LagrangeSolution& sol) {
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!config.out.empty()) {
    file.open(config.out + ".sidecar.csv");
    if (!file) throw Error("cannot open sidecar next to " + config.out);
    os = &file;
  } else {
    std::cout << '\n';
  }
  *os << "beta";
  if (sol.delta.size() == 1)
    *os << ",delta";
  else
    for (std::size_t i = 0; i < sol.delta.size(); ++i) *os << ",delta" << i;
  *os << ",gamma,residual_marginal,residual_average\n" << fmt17(sol.beta);
  for (double d : sol.delta) *os << ',' << fmt17(d);
  *os << ',' << fmt17(sol.gamma) << ',' << fmt17(sol.residual_marginal) << ','
      << fmt17(sol.residual_average) << '\n';
}

ObservedMarginal py_from(const RunConfig& config, const std::string& fallback) {
  return ObservedMarginal(
      parse_list("py", optional_or(config, "py", fallback)));
}

int run_eval(const RunConfig& config) {
  const FiniteJoint joint = read_joint_csv_file(require(config, "grid"));
  const ObservedMarginal py =
      config.params.count("py")
          ? ObservedMarginal(parse_list("py", config.params.at("py")))
          : ObservedMarginal(joint.marginal_y());
  Sink sink(config.out);
  sink.stream() << fmt17(log_generalized_likelihood(joint, py, config.beta))
                << '\n';
  return 0;
}

int run_em(const RunConfig& config) {
  const std::string family_name = optional_or(config, "family", "discrete");
  if (family_name != "discrete")
    throw UsageError("--family: only 'discrete' is built in");
  const double z = parse_double("z", require(config, "z"));
  if (!(z > 0.0 && z < 1.0)) throw UsageError("--z: must be in (0,1)");
  ParametricFamily family{
      2,
      [](const std::vector<double>& t) { return discrete_joint(t[0], t[1]); },
      {{0.0, 25.0}, {0.0, 25.0}}};
  const std::vector<double> theta0 =
      parse_list("theta0", optional_or(config, "theta0", "0.25,0.25"));
  if (theta0.size() != 2) throw UsageError("--theta0: expected two values");
  EmStop stop;
  stop.max_iters = static_cast<int>(
      parse_long("max-iters", optional_or(config, "max-iters", "200")));
  stop.delta_tol =
      parse_double("delta-tol", optional_or(config, "delta-tol", "1e-9"));
  const EmTrace trace =
      em_run(family, theta0, discrete_marginal(z), config.beta, stop);
  Sink sink(config.out);
  trace.write_csv(sink.stream());
  return 0;
}

int run_solver(const RunConfig& config) {
  const ObservedMarginal py(parse_list("py", require(config, "py")));
  const int m = py.m();
  const std::string score_spec = require(config, "score");
  // builtin scores are square over m unless the CSV pins n
  const int n = m;
  LinearConstraint constraint{n, m, load_score(score_spec, n, m),
                              parse_double("target", require(config, "target"))};
  Sink sink(config.out);
  if (config.subcommand == "gibbs-limit") {
    const GibbsSolution sol = gibbs_limit_solution(py, constraint);
    emit_grid(config, sink.stream(), sol.joint, "p_hat");
    std::ofstream file;
    std::ostream* os = &std::cout;
    if (!config.out.empty()) {
      file.open(config.out + ".sidecar.csv");
      os = &file;
    } else {
      std::cout << '\n';
    }
    *os << "Gamma,residual_average\n"
        << fmt17(sol.gamma_big) << ',' << fmt17(sol.residual_average) << '\n';
    return 0;
  }
  const LagrangeSolution sol =
      config.subcommand == "solve-avg"
          ? solve_known_average(py, constraint, config.beta)
          : solve_two_constraints(py, constraint, config.beta);
  emit_grid(config, sink.stream(), sol.joint, "p_hat");
  emit_sidecar(config, sol);
  return 0;
}

int run_discrete(const RunConfig& config) {
  const double z = parse_double("z", require(config, "z"));
  const DiscreteSolution sol = discrete_solve(z, config.beta);
  Sink sink(config.out);
  std::ostream& os = sink.stream();
  const auto emit = [&](const char* kind, double g, double h, bool gd, bool hd,
                        double residual) {
    os << "{\"z\":" << fmt17(z) << ",\"beta\":" << fmt17(config.beta)
       << ",\"kind\":\"" << kind << "\",\"g_hat\":" << fmt17(g)
       << ",\"h_hat\":" << fmt17(h) << ",\"g_diverged\":" << json_bool(gd)
       << ",\"h_diverged\":" << json_bool(hd)
       << ",\"residual\":" << fmt17(residual)
       << ",\"overlap\":" << fmt17(discrete_overlap(z, g, h, gd, hd)) << "}\n";
  };
  switch (sol.kind) {
    case DiscreteSolutionKind::kZero:
      emit("zero", 0.0, 0.0, false, false, 0.0);
      break;
    case DiscreteSolutionKind::kSymmetricRoot:
      emit("symmetric-root", sol.g_hat, sol.h_hat, false, false, sol.residual);
      break;
    case DiscreteSolutionKind::kDegenerateManifold:
      os << "{\"z\":" << fmt17(z) << ",\"beta\":" << fmt17(config.beta)
         << ",\"kind\":\"degenerate-manifold\",\"relation\":\"tanh(g_hat)*tanh(h_hat)=z\"}\n";
      break;
    case DiscreteSolutionKind::kDivergedPair:
      emit("diverged-pair", 0.0, sol.h_hat, true, false, 0.0);
      emit("diverged-pair", sol.g_hat, 0.0, false, true, 0.0);
      break;
  }
  return 0;
}

int run_continuous(const RunConfig& config) {
  const double chi = parse_double("chi", require(config, "chi"));
  std::optional<double> cap;
  if (config.params.count("cap")) {
    cap = parse_double("cap", config.params.at("cap"));
    if (!(*cap > 0.0)) throw UsageError("--cap: must be > 0");
  }
  const ContinuousSolution sol = continuous_solve(chi, config.beta, cap);
  const char* status = nullptr;
  switch (sol.status) {
    case ContinuousStatus::kUniqueAtBetaOne: status = "unique-at-beta-one"; break;
    case ContinuousStatus::kDivergesSmallH: status = "diverges-small-h"; break;
    case ContinuousStatus::kDivergesLargeH: status = "diverges-large-h"; break;
    case ContinuousStatus::kCapped: status = "capped"; break;
    case ContinuousStatus::kNotSensible: status = "not-sensible"; break;
  }
  Sink sink(config.out);
  sink.stream() << "{\"chi\":" << fmt17(chi)
                << ",\"beta\":" << fmt17(config.beta) << ",\"status\":\""
                << status << "\",\"chi_hat\":" << fmt17(sol.chi_hat)
                << (sol.h_hat ? ",\"h_hat\":" + fmt17(*sol.h_hat) : "")
                << "}\n";
  return 0;
}

int run_maximin(const RunConfig& config) {
  const MaximinReport report = maximin_demo();
  Sink sink(config.out);
  std::ostream& os = sink.stream();
  os << "{\"record\":\"crossover\",\"u\":" << fmt17(report.crossover_u)
     << ",\"gap\":" << fmt17(report.crossover_gap) << "}\n";
  os << "{\"record\":\"per-observation\",\"v_argmax\":"
     << fmt17(report.v_argmax)
     << ",\"u_argmax_low\":" << fmt17(report.u_branch_low_argmax)
     << ",\"u_diverges\":" << json_bool(report.u_branch_high_diverges) << "}\n";
  os << "{\"record\":\"averaged\",\"v_argmax\":" << fmt17(report.avg_v_argmax)
     << ",\"u_spread\":" << fmt17(report.avg_u_spread)
     << ",\"worst_match_error\":" << fmt17(report.avg_match_worst_err)
     << ",\"conclusion\":\"u undetermined\"}\n";
  return 0;
}

int run_majorize(const RunConfig& config) {
  FeasibleSet fs;
  if (config.params.count("py"))
    fs.pY = ObservedMarginal(parse_list("py", config.params.at("py")));
  if (config.params.count("px"))
    fs.pX = ObservedMarginal(parse_list("px", config.params.at("px")));
  if (config.params.count("n"))
    fs.n = static_cast<int>(parse_long("n", config.params.at("n")));
  if (config.params.count("m"))
    fs.m = static_cast<int>(parse_long("m", config.params.at("m")));
  if (!fs.pY && !fs.pX && (fs.n < 1 || fs.m < 1))
    throw UsageError("majorize needs --py/--px or explicit --n and --m");
  if (fs.pX && fs.n == 0) fs.n = fs.pX->m();
  if (fs.pY && fs.m == 0) fs.m = fs.pY->m();
  if (fs.n == 0) fs.n = fs.m;
  if (fs.m == 0) fs.m = fs.n;
  const SparseSolution sol = greedy_majorize(fs);

  Sink sink(config.out);
  emit_grid(config, sink.stream(), sol.joint, "p_hat");
  std::ofstream file;
  std::ostream* os = &std::cout;
  if (!config.out.empty()) {
    file.open(config.out + ".order.jsonl");
    if (!file) throw Error("cannot open order file next to " + config.out);
    os = &file;
  } else {
    std::cout << '\n';
  }
  for (std::size_t i = 0; i < sol.selection_order.size(); ++i)
    *os << "{\"stage\":" << i << ",\"x\":" << sol.selection_order[i].first
        << ",\"y\":" << sol.selection_order[i].second << ",\"p\":"
        << fmt17(sol.joint(sol.selection_order[i].first,
                           sol.selection_order[i].second))
        << "}\n";
  *os << "{\"zero_count\":" << sol.zero_count
      << ",\"L_inf\":" << fmt17(sol.l_inf_value) << "}\n";
  return 0;
}

int run_d1d2_cmd(const RunConfig& config) {
  const int n = static_cast<int>(parse_long("n", require(config, "n")));
  const int m = static_cast<int>(parse_long("m", require(config, "m")));
  const int S = static_cast<int>(parse_long("S", require(config, "S")));
  const std::vector<double> score = load_score(require(config, "score"), n, m);
  const ComparisonReport report = run_d1_d2(n, m, score, config.beta, S,
                                            config.seed, effective_threads(config));
  Sink sink(config.out);
  write_d1_d2_csv(sink.stream(), report);
  std::cerr << "D1 " << fmt17(report.D1.mean) << " +- "
            << fmt17(report.D1.std_error) << ", D2 " << fmt17(report.D2.mean)
            << " +- " << fmt17(report.D2.std_error) << ", K1 "
            << fmt17(report.K1.mean) << " +- " << fmt17(report.K1.std_error)
            << ", K2 " << fmt17(report.K2.mean) << " +- "
            << fmt17(report.K2.std_error) << ", skipped " << report.skipped
            << "\n";
  return 0;
}

int run_d3_cmd(const RunConfig& config) {
  const int n = static_cast<int>(parse_long("n", require(config, "n")));
  const int m = static_cast<int>(parse_long("m", require(config, "m")));
  const int S = static_cast<int>(parse_long("S", require(config, "S")));
  const int M = static_cast<int>(parse_long("M", require(config, "M")));
  const std::vector<double> score = load_score(require(config, "score"), n, m);
  const ComparisonReport report = run_d3(n, m, score, config.beta, S, M,
                                         config.seed, effective_threads(config));
  Sink sink(config.out);
  write_d3_csv(sink.stream(), report);
  std::cerr << "DeltaD3 " << fmt17(report.DeltaD3.mean) << " +- "
            << fmt17(report.DeltaD3.std_error) << ", DeltaK3 "
            << fmt17(report.DeltaK3.mean) << " +- "
            << fmt17(report.DeltaK3.std_error) << ", skipped "
            << report.skipped << "\n";
  return 0;
}

int run_fig1_cmd(const RunConfig& config) {
  const ObservedMarginal py = py_from(config, "0.4,0.01,0.5,0.09");
  const int n = py.m();
  const std::vector<double> score =
      load_score(optional_or(config, "score", "product"), n, py.m());
  const std::vector<double> betas =
      parse_list("beta-list", optional_or(config, "beta-list", "0.85,0.9,0.95"));
  const int targets = static_cast<int>(
      parse_long("targets", optional_or(config, "targets", "25")));
  const std::vector<Fig1Point> points = run_fig1_sweep(betas, py, score, targets);
  Sink sink(config.out);
  write_fig1_csv(sink.stream(), points);
  return 0;
}

int run_maxent_cmd(const RunConfig& config) {
  const int n =
      static_cast<int>(parse_long("n", optional_or(config, "n", "6")));
  std::vector<double> z;
  if (config.params.count("z-list")) {
    z = parse_list("z-list", config.params.at("z-list"));
  } else {
    for (int k = 1; k <= n; ++k) z.push_back(k);
  }
  const std::vector<int> m_list = parse_int_list(
      "M-list", optional_or(config, "M-list", "7,11,21,31,41,61,101"));
  const int samples = static_cast<int>(
      parse_long("samples", optional_or(config, "samples", "1000")));
  const int draws = static_cast<int>(
      parse_long("draws", optional_or(config, "draws", "100")));
  const std::vector<MaxentRow> rows = run_maxent_study(
      n, z, m_list, samples, draws, config.seed, effective_threads(config));
  Sink sink(config.out);
  write_maxent_csv(sink.stream(), rows);
  return 0;
}

}  // namespace

int dispatch(const RunConfig& config) {
  if (config.subcommand == "eval") return run_eval(config);
  if (config.subcommand == "em") return run_em(config);
  if (config.subcommand == "solve-avg" || config.subcommand == "solve-two" ||
      config.subcommand == "gibbs-limit")
    return run_solver(config);
  if (config.subcommand == "discrete") return run_discrete(config);
  if (config.subcommand == "continuous") return run_continuous(config);
  if (config.subcommand == "maximin-demo") return run_maximin(config);
  if (config.subcommand == "majorize") return run_majorize(config);
  if (config.subcommand == "d1d2") return run_d1d2_cmd(config);
  if (config.subcommand == "d3") return run_d3_cmd(config);
  if (config.subcommand == "fig1") return run_fig1_cmd(config);
  if (config.subcommand == "maxent-study") return run_maxent_cmd(config);
  throw UsageError("unknown subcommand '" + config.subcommand + "'");
}

int genlik_main(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  try {
    const RunConfig config = parse_config(args);
    return dispatch(config);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n\n" << kUsage;
    return 2;
  } catch (const Error& e) {
    // solver-level failure: diagnostic record on stdout, status 1
    std::cout << "{\"error\":\"solver\",\"message\":\"" << e.what() << "\"}\n";
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace genlik
