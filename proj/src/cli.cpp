#include "dirtail/cli.hpp"

#include <CLI11.hpp>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <json.hpp>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "dirtail/aggtail.hpp"
#include "dirtail/errors.hpp"
#include "dirtail/montecarlo.hpp"
#include "dirtail/radial.hpp"

namespace dirtail::cli {

namespace {

using json = nlohmann::ordered_json;

struct Options {
  std::string command;
  std::string config_path;
  std::string out_path;
  std::string format = "csv";
  std::string dump_path;
  unsigned workers = 1;
  std::optional<std::uint64_t> seed;
};

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;
  json extra = json::object();  // JSON-only metadata
};

const std::set<std::string> kCommonKeys = {"alpha", "lambda", "p", "radial", "tolerance", "seed"};

std::set<std::string> command_keys(const std::string& cmd) {
  if (cmd == "approx") return {"thresholds", "depths"};
  if (cmd == "simulate") return {"thresholds", "depths", "method", "n"};
  if (cmd == "ratio") return {"depths", "oracle", "n"};
  if (cmd == "var-es") return {"levels"};
  if (cmd == "diagnose-mda") return {"mode", "x", "t", "mu", "c", "grid", "x_grid", "depths", "n"};
  if (cmd == "maxstable") return {"levels", "source", "weights", "pair", "n"};
  return {};
}

// ---- config access -------------------------------------------------------

std::string line_col(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t k = 0; k + 1 < byte && k < text.size(); ++k) {
    if (text[k] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return std::to_string(line) + ":" + std::to_string(col);
}

json read_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    std::string what = e.what();
    // drop nlohmann's "[json.exception.parse_error.101] parse error at line x, column y: "
    if (const auto pos = what.find(": "); pos != std::string::npos) what = what.substr(pos + 2);
    throw ValidationError(path + ":" + line_col(text, e.byte) + ": malformed JSON: " + what);
  }
}

double get_number(const json& j, const std::string& key) {
  if (!j.is_number()) throw ValidationError("'" + key + "' must be a number");
  return j.get<double>();
}

double number_or(const json& cfg, const std::string& key, double fallback) {
  return cfg.contains(key) ? get_number(cfg.at(key), key) : fallback;
}

std::vector<double> get_vector(const json& cfg, const std::string& key) {
  if (!cfg.contains(key)) throw ValidationError("missing required key '" + key + "'");
  const json& j = cfg.at(key);
  if (!j.is_array()) throw ValidationError("'" + key + "' must be an array of numbers");
  std::vector<double> v;
  for (const auto& x : j) v.push_back(get_number(x, key));
  return v;
}

std::vector<double> vector_or(const json& cfg, const std::string& key,
                              std::vector<double> fallback) {
  return cfg.contains(key) ? get_vector(cfg, key) : fallback;
}

std::string string_or(const json& cfg, const std::string& key, const std::string& fallback) {
  if (!cfg.contains(key)) return fallback;
  if (!cfg.at(key).is_string()) throw ValidationError("'" + key + "' must be a string");
  return cfg.at(key).get<std::string>();
}

std::size_t count_or(const json& cfg, const std::string& key, std::size_t fallback) {
  if (!cfg.contains(key)) return fallback;
  const json& j = cfg.at(key);
  if (!j.is_number_integer() || j.get<std::int64_t>() < 1) {
    throw ValidationError("'" + key + "' must be a positive integer");
  }
  return j.get<std::size_t>();
}

RadialModel parse_radial(const json& cfg) {
  if (!cfg.contains("radial")) throw ValidationError("missing required key 'radial'");
  const json& r = cfg.at("radial");
  if (!r.is_object()) throw ValidationError("'radial' must be an object");
  for (const auto& [k, _] : r.items()) {
    if (k != "family" && k != "params") throw ValidationError("unknown key 'radial." + k + "'");
  }
  const std::string family = string_or(r, "family", "");
  const json params = r.contains("params") ? r.at("params") : json::object();
  if (!params.is_object()) throw ValidationError("'radial.params' must be an object");

  auto take = [&](std::set<std::string> allowed) {
    for (const auto& [k, _] : params.items()) {
      if (!allowed.count(k)) {
        throw ValidationError("unknown parameter '" + k + "' for radial family '" + family + "'");
      }
    }
  };
  auto need = [&](const std::string& k) {
    if (!params.contains(k)) {
      throw ValidationError("radial family '" + family + "' needs parameter '" + k + "'");
    }
    return get_number(params.at(k), "radial.params." + k);
  };
  if (family == "gamma") {
    take({"shape", "rate"});
    return RadialModel::gamma(need("shape"), number_or(params, "rate", 1.0));
  }
  if (family == "weibulltail") {
    take({"index", "scale"});
    return RadialModel::weibull_tail(need("index"), number_or(params, "scale", 1.0));
  }
  if (family == "beta") {
    take({"a", "b"});
    return RadialModel::beta(need("a"), need("b"));
  }
  if (family == "unitgumbel") {
    take({"kappa"});
    return RadialModel::unit_gumbel(need("kappa"));
  }
  throw ValidationError("unknown radial family '" + family +
                        "' (expected gamma, weibulltail, beta or unitgumbel)");
}

AggregateSpec parse_spec(const json& cfg) {
  const auto alpha = get_vector(cfg, "alpha");
  const auto lambda = get_vector(cfg, "lambda");
  if (!cfg.contains("p")) throw ValidationError("missing required key 'p'");
  return validate_spec(alpha, lambda, get_number(cfg.at("p"), "p"), parse_radial(cfg),
                       number_or(cfg, "tolerance", 0.0));
}

std::uint64_t spec_hash(const json& cfg) {
  json canon = json::object();
  for (const char* k : {"alpha", "lambda", "p", "radial", "tolerance"}) {
    if (cfg.contains(k)) canon[k] = cfg.at(k);
  }
  // FNV-1a, 64 bit
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canon.dump()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

std::uint64_t require_seed(const json& cfg) {
  if (!cfg.contains("seed")) {
    throw ValidationError("this command is randomised and needs an explicit seed (--seed or 'seed')");
  }
  const json& s = cfg.at("seed");
  if (!s.is_number_integer()) throw ValidationError("'seed' must be an integer");
  return s.get<std::uint64_t>();
}

// thresholds given directly, or via F̄ depth targets
std::vector<std::pair<double, json>> threshold_grid(const json& cfg, const AggregateSpec& spec,
                                                    std::vector<double> default_depths) {
  std::vector<std::pair<double, json>> grid;
  if (cfg.contains("thresholds")) {
    for (double t : get_vector(cfg, "thresholds")) grid.emplace_back(t, json());
    return grid;
  }
  for (double d : vector_or(cfg, "depths", default_depths)) {
    grid.emplace_back(threshold_at_depth(spec, d), d);
  }
  return grid;
}

// ---- commands ------------------------------------------------------------

Table cmd_approx(const json& cfg) {
  const auto spec = parse_spec(cfg);
  const auto info = regime_classify(spec);
  const auto tail = tail_asymptotic(spec);
  Table t{{"threshold", "depth", "regime", "K_log", "rho", "prediction_log", "prediction"}, {}, {}};
  t.extra["asymptotic"] = json::parse(tail.to_json());
  t.extra["single_big_jump"] = info.single_big_jump;
  for (const auto& [thr, depth] : threshold_grid(cfg, spec, {1e-6, 1e-8, 1e-10})) {
    const LogProb lp = tail.evaluate(thr);
    t.rows.push_back({thr, depth, to_string(info.regime), tail.log_k, tail.rho, lp.log_value,
                      lp.value()});
  }
  return t;
}

Table cmd_simulate(const json& cfg, const ParallelConfig& par) {
  const auto spec = parse_spec(cfg);
  const std::string method = string_or(cfg, "method", "conditional");
  if (method != "conditional" && method != "crude" && method != "quadrature") {
    throw ValidationError("'method' must be conditional, crude or quadrature");
  }
  const std::size_t n = count_or(cfg, "n", 100000);
  const std::uint64_t seed = method == "quadrature" ? 0 : require_seed(cfg);
  Table t{{"threshold", "depth", "method", "p_hat", "log_p_hat", "stderr", "n", "seed"}, {}, {}};
  for (const auto& [thr, depth] : threshold_grid(cfg, spec, {1e-2, 1e-4, 1e-6})) {
    Estimate e;
    if (method == "conditional") {
      e = conditional_mc_tail(spec, thr, n, seed, par);
    } else if (method == "crude") {
      e = crude_mc_tail(spec, thr, n, seed, par);
    } else {
      e = quadrature_tail(spec, thr);
    }
    t.rows.push_back({thr, depth, to_string(e.method), e.p_hat, e.log_p_hat, e.stderr_, e.n,
                      e.seed});
  }
  return t;
}

Table cmd_ratio(const json& cfg, const ParallelConfig& par) {
  const auto spec = parse_spec(cfg);
  const auto tail = tail_asymptotic(spec);
  const std::string oracle =
      string_or(cfg, "oracle", spec.dim() <= 3 ? "quadrature" : "conditional");
  if (oracle != "quadrature" && oracle != "conditional") {
    throw ValidationError("'oracle' must be quadrature or conditional");
  }
  const std::size_t n = count_or(cfg, "n", 1000000);
  const std::uint64_t seed = oracle == "conditional" ? require_seed(cfg) : 0;
  Table t{{"threshold", "depth", "prediction_log", "oracle_log", "ratio"}, {}, {}};
  t.extra["oracle"] = oracle;
  for (double depth : vector_or(cfg, "depths", {1e-6, 1e-8, 1e-10})) {
    const double thr = threshold_at_depth(spec, depth);
    const double pred = tail.evaluate(thr).log_value;
    const double orc = oracle == "quadrature" ? quadrature_tail(spec, thr).log_p_hat
                                              : conditional_mc_tail(spec, thr, n, seed, par).log_p_hat;
    t.rows.push_back({thr, depth, pred, orc, std::exp(pred - orc)});
  }
  return t;
}

Table cmd_var_es(const json& cfg) {
  const auto spec = parse_spec(cfg);
  Table t{{"b", "var", "es_minus_var", "accuracy_warning"}, {}, {}};
  for (double b : vector_or(cfg, "levels", {0.99, 0.999, 0.9999})) {
    const auto r = var_es_asymptotic(spec, b);
    t.rows.push_back({b, r.var, r.es_minus_var, r.accuracy_warning});
  }
  return t;
}

Table cmd_diagnose(const json& cfg, const ParallelConfig& par) {
  const std::string mode = string_or(cfg, "mode", "gumbel_ratio");
  if (mode == "empirical") {
    const auto spec = parse_spec(cfg);
    const auto rows = empirical_gumbel_mda(spec, vector_or(cfg, "x_grid", {0.5, 1.0, 2.0}),
                                           vector_or(cfg, "depths", {1e-4, 1e-6, 1e-8}),
                                           count_or(cfg, "n", 100000), require_seed(cfg), par);
    Table t{{"depth", "v", "x", "ratio", "limit"}, {}, {}};
    for (const auto& r : rows) t.rows.push_back({r.depth, r.v, r.x, r.ratio, r.limit});
    return t;
  }
  DiagnosticMode dm;
  if (mode == "gumbel_ratio") {
    dm = DiagnosticMode::gumbel_ratio;
  } else if (mode == "weibull_ratio") {
    dm = DiagnosticMode::weibull_ratio;
  } else if (mode == "davis_resnick") {
    dm = DiagnosticMode::davis_resnick;
  } else {
    throw ValidationError("'mode' must be gumbel_ratio, weibull_ratio, davis_resnick or empirical");
  }
  const RadialModel radial = parse_radial(cfg);
  DiagnosticParams params;
  params.x = number_or(cfg, "x", params.x);
  params.t = number_or(cfg, "t", params.t);
  params.mu = number_or(cfg, "mu", params.mu);
  params.c = number_or(cfg, "c", params.c);
  const auto rows = mda_diagnostic(radial, dm, params, vector_or(cfg, "grid", {}));
  Table t{{"u", "ratio", "log_ratio"}, {}, {}};
  t.extra["mode"] = mode;
  for (const auto& r : rows) t.rows.push_back({r.u, r.ratio, r.log_ratio});
  return t;
}

Table cmd_maxstable(const json& cfg, const ParallelConfig& par) {
  const auto levels = vector_or(cfg, "levels", {1e2, 1e3, 1e4});
  if (cfg.contains("weights")) {
    const json& w = cfg.at("weights");
    if (!w.is_array()) throw ValidationError("'weights' must be a matrix (array of rows)");
    std::vector<std::vector<double>> weights;
    for (const auto& row : w) {
      if (!row.is_array()) throw ValidationError("'weights' rows must be arrays");
      std::vector<double> r;
      for (const auto& x : row) r.push_back(get_number(x, "weights"));
      weights.push_back(r);
    }
    const auto pair = vector_or(cfg, "pair", {0, 1});
    if (pair.size() != 2 || pair[0] < 0 || pair[1] < 0) {
      throw ValidationError("'pair' must hold two column indices");
    }
    if (!cfg.contains("p")) throw ValidationError("missing required key 'p'");
    const auto rows = pairwise_asymindep(
        get_vector(cfg, "alpha"), weights, get_number(cfg.at("p"), "p"), parse_radial(cfg),
        static_cast<std::size_t>(pair[0]), static_cast<std::size_t>(pair[1]), levels,
        count_or(cfg, "n", 100000), require_seed(cfg), par);
    Table t{{"level", "b_n", "pair_ratio"}, {}, {}};
    for (const auto& r : rows) t.rows.push_back({r.level_n, r.b_n, r.ratio});
    return t;
  }
  const auto spec = parse_spec(cfg);
  const std::string src = string_or(cfg, "source", "asymptotic");
  NormingSource source;
  if (src == "asymptotic") {
    source = NormingSource::asymptotic;
  } else if (src == "exact") {
    source = NormingSource::exact_quadrature;
  } else {
    throw ValidationError("'source' must be asymptotic or exact");
  }
  Table t{{"level", "a_n", "b_n"}, {}, {}};
  for (double n : levels) {
    const auto nc = norming_constants(spec, n, source);
    t.rows.push_back({n, nc.a_n, nc.b_n});
  }
  return t;
}

Table cmd_constants(const json& cfg) {
  const auto spec = parse_spec(cfg);
  if (regime_classify(spec).regime != Regime::c) {
    throw RegimeError("constants needs a regime-c spec (0 < p < 1, all lambda_i > 0, d >= 2)");
  }
  const auto geo = simplex_constant_recursion(spec);
  Table t{{"k", "lambda_tilde", "theta", "curvature", "C_tilde", "rv_index"}, {}, {}};
  for (const auto& l : geo.levels) {
    t.rows.push_back({l.k, l.lambda_tilde, l.theta, l.curvature, l.c_tilde, l.rv_index});
  }
  return t;
}

// ---- output --------------------------------------------------------------

std::string format_cell(const json& v) {
  if (v.is_null()) return "";
  if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number_integer()) return v.dump();
  std::ostringstream os;
  os << std::scientific << std::setprecision(16) << v.get<double>();
  return os.str();
}

std::string hex64(std::uint64_t h) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

void write_table(std::ostream& os, const Table& t, const Options& opt, const json& cfg) {
  const std::string seed = cfg.contains("seed") ? cfg.at("seed").dump() : "none";
  const std::string hash = hex64(spec_hash(cfg));
  if (opt.format == "json") {
    json doc = json::object();
    doc["version"] = kVersion;
    doc["command"] = opt.command;
    doc["seed"] = cfg.contains("seed") ? cfg.at("seed") : json();
    doc["spec_hash"] = hash;
    for (const auto& [k, v] : t.extra.items()) doc[k] = v;
    json rows = json::array();
    for (const auto& r : t.rows) {
      json o = json::object();
      for (std::size_t c = 0; c < t.columns.size(); ++c) {
        const json& v = r[c];
        o[t.columns[c]] = v.is_number_float() && !std::isfinite(v.get<double>()) ? json() : v;
      }
      rows.push_back(o);
    }
    doc["rows"] = rows;
    os << doc.dump(2) << "\n";
    return;
  }
  os << "# dirtail " << kVersion << " command=" << opt.command << " seed=" << seed
     << " spec_hash=" << hash << "\n";
  for (std::size_t c = 0; c < t.columns.size(); ++c) os << (c ? "," : "") << t.columns[c];
  os << "\n";
  for (const auto& r : t.rows) {
    for (std::size_t c = 0; c < r.size(); ++c) os << (c ? "," : "") << format_cell(r[c]);
    os << "\n";
  }
}

int execute(const Options& opt, std::ostream& out) {
  json cfg = read_config(opt.config_path);
  if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
  const auto extra = command_keys(opt.command);
  for (const auto& [k, _] : cfg.items()) {
    if (!kCommonKeys.count(k) && !extra.count(k)) {
      throw ValidationError("unknown config key '" + k + "' for command '" + opt.command + "'");
    }
  }
  if (opt.seed) cfg["seed"] = *opt.seed;

  if (!opt.dump_path.empty()) {
    std::ofstream dump(opt.dump_path);
    if (!dump) throw ValidationError("cannot write '" + opt.dump_path + "'");
    dump << cfg.dump(2) << "\n";
  }

  ParallelConfig par;
  par.workers = opt.workers;

  Table table;
  if (opt.command == "approx") {
    table = cmd_approx(cfg);
  } else if (opt.command == "simulate") {
    table = cmd_simulate(cfg, par);
  } else if (opt.command == "ratio") {
    table = cmd_ratio(cfg, par);
  } else if (opt.command == "var-es") {
    table = cmd_var_es(cfg);
  } else if (opt.command == "diagnose-mda") {
    table = cmd_diagnose(cfg, par);
  } else if (opt.command == "maxstable") {
    table = cmd_maxstable(cfg, par);
  } else {
    table = cmd_constants(cfg);
  }

  if (opt.out_path.empty()) {
    write_table(out, table, opt, cfg);
  } else {
    std::ofstream f(opt.out_path);
    if (!f) throw ValidationError("cannot write '" + opt.out_path + "'");
    write_table(f, table, opt, cfg);
  }
  return ExitCode::ok;
}

}  // namespace

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Tail asymptotics and simulation for Dirichlet aggregates", "dirtail"};
  app.require_subcommand(1);
  Options opt;
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"approx", "evaluate the tail asymptotic"},
      {"simulate", "Monte Carlo or quadrature tail estimates"},
      {"ratio", "asymptotic / oracle ratios on a depth grid"},
      {"var-es", "asymptotic VaR and ES gap"},
      {"diagnose-mda", "domain-of-attraction diagnostics"},
      {"maxstable", "norming constants and pairwise exceedance ratios"},
      {"constants", "simplex constant recursion"},
  };
  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--config", opt.config_path, "JSON run configuration")->required();
    sub->add_option("--out", opt.out_path, "output file (default stdout)");
    sub->add_option("--format", opt.format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--workers", opt.workers, "worker threads; results do not depend on it")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--seed", opt.seed, "RNG seed, overrides the config");
    sub->add_option("--dump-config", opt.dump_path, "write the resolved config here");
    sub->callback([&opt, name = name] { opt.command = name; });
  }

  std::vector<std::string> argv(args.rbegin(), args.rend());
  try {
    app.parse(argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ExitCode::ok : ExitCode::validation;
  }

  try {
    return execute(opt, out);
  } catch (const NumericError& e) {
    err << "dirtail: numeric failure: " << e.what() << "\n";
    return ExitCode::numeric;
  } catch (const ValidationError& e) {
    err << "dirtail: invalid input: " << e.what() << "\n";
  } catch (const RegimeError& e) {
    err << "dirtail: wrong regime: " << e.what() << "\n";
  } catch (const UnsupportedError& e) {
    err << "dirtail: unsupported: " << e.what() << "\n";
  } catch (const DomainError& e) {
    err << "dirtail: domain error: " << e.what() << "\n";
  } catch (const nlohmann::json::exception& e) {
    err << "dirtail: invalid input: " << e.what() << "\n";
  } catch (const std::exception& e) {
    err << "dirtail: numeric failure: " << e.what() << "\n";
    return ExitCode::numeric;
  }
  return ExitCode::validation;
}

}  // namespace dirtail::cli
