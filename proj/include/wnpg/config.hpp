// JSON experiment configs and regularity-constant files.
//
// Experiment config keys (strict: anything else is rejected):
//   env            "lqr" | "bandit"                            required
//   T, gamma       horizon and discount (LQR 50 / 1, bandit 1 / 1)
//   A, B, Q, R     LQR 2x2 matrices as [[a, b], [c, d]]
//   dim, lipschitz bandit action dimension and peak slope (1 / 1)
//   action_clip    [lo, hi], off by default
//   policy         "linear" | "mlp"                            (linear)
//   algo           "pgpe" | "gpomdp"                           required
//   noise          {"kind": "gaussian" | "uniform", "sigma": x} sigma required
//   iterations, batch_size                                     required
//   optimizer      "adam" | "constant", step_size              required
//   max_grad_norm  optional clipping threshold
//   seed           64-bit master seed                          required
//   eval_every (10), eval_episodes (100 LQR, 1 bandit)
//   theta_init, divergence_threshold (-1e9), sigma_sq_values, repeat_seeds (1),
//   record_wallclock (false)
//
// Overrides are "path=value" patches applied to the parsed JSON before
// validation. Paths are dot-separated ("noise.sigma"); "sigma" is accepted
// as a shorthand for "noise.sigma". Values are parsed as JSON when possible
// and taken as strings otherwise.

#pragma once

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "wnpg/theory.hpp"
#include "wnpg/train.hpp"

namespace wnpg {

using Json = nlohmann::json;

namespace detail {

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw Error(where + "unknown key '" + it.key() + "'");
  }
}

template <typename T>
T get_field(const Json& j, const std::string& key, const std::string& path) {
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    if (!j.contains(key)) throw Error(path + ": missing required key");
    throw Error(path + ": wrong type");
  }
}

template <typename T>
T get_or(const Json& j, const std::string& key, T fallback, const std::string& path) {
  if (!j.contains(key)) return fallback;
  return get_field<T>(j, key, path);
}

inline std::size_t get_count(const Json& j, const std::string& key, const std::string& path) {
  const Json& v = j.at(key);
  require(v.is_number_integer() && v.get<long long>() >= 0, path + ": must be a nonnegative integer");
  return v.get<std::size_t>();
}

inline Mat2 parse_mat2(const Json& j, const std::string& path) {
  require(j.is_array() && j.size() == 2 && j[0].is_array() && j[0].size() == 2 && j[1].is_array() &&
              j[1].size() == 2,
          path + ": must be a 2x2 array [[a, b], [c, d]]");
  Mat2 m{};
  for (int r = 0; r < 2; ++r) {
    for (int c = 0; c < 2; ++c) {
      require(j[r][c].is_number(), path + ": entries must be numbers");
      m[static_cast<std::size_t>(r * 2 + c)] = j[r][c].get<double>();
    }
  }
  return m;
}

inline Json mat2_json(const Mat2& m) { return Json::array({Json::array({m[0], m[1]}), Json::array({m[2], m[3]})}); }

inline Json parse_override_value(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error&) {
    return Json(text);
  }
}

}  // namespace detail

/// Applies one "path=value" patch in place.
inline void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  require(eq != std::string::npos && eq > 0, "override '" + assignment + "': expected key=value");
  std::string path = assignment.substr(0, eq);
  if (path == "sigma") path = "noise.sigma";
  Json* node = &j;
  std::size_t start = 0;
  while (true) {
    const auto dot = path.find('.', start);
    const std::string key = path.substr(start, dot == std::string::npos ? std::string::npos : dot - start);
    require(!key.empty(), "override '" + assignment + "': empty path segment");
    if (dot == std::string::npos) {
      (*node)[key] = detail::parse_override_value(assignment.substr(eq + 1));
      return;
    }
    if (!node->contains(key) || !(*node)[key].is_object()) (*node)[key] = Json::object();
    node = &(*node)[key];
    start = dot + 1;
  }
}

inline ExperimentConfig config_from_json(const Json& j) {
  using namespace detail;
  require(j.is_object(), "config: top level must be an object");
  const std::string env = get_field<std::string>(j, "env", "env");

  std::set<std::string> allowed = {"env",        "T",          "gamma",         "action_clip",  "policy",
                                   "algo",       "noise",      "iterations",    "batch_size",   "optimizer",
                                   "step_size",  "max_grad_norm", "seed",       "eval_every",   "eval_episodes",
                                   "theta_init", "divergence_threshold", "sigma_sq_values", "repeat_seeds",
                                   "record_wallclock"};
  std::optional<ActionClip> clip;
  if (j.contains("action_clip")) {
    const Json& c = j.at("action_clip");
    require(c.is_array() && c.size() == 2 && c[0].is_number() && c[1].is_number(),
            "action_clip: must be [lo, hi]");
    clip = ActionClip{c[0].get<double>(), c[1].get<double>()};
    require(clip->lo <= clip->hi, "action_clip: lo must be <= hi");
  }

  ExperimentConfig cfg;
  if (env == "lqr") {
    allowed.insert({"A", "B", "Q", "R"});
    reject_unknown_keys(j, allowed, "config: ");
    LqrSpec s;
    if (j.contains("A")) s.A = parse_mat2(j.at("A"), "A");
    if (j.contains("B")) s.B = parse_mat2(j.at("B"), "B");
    if (j.contains("Q")) s.Q = parse_mat2(j.at("Q"), "Q");
    if (j.contains("R")) s.R = parse_mat2(j.at("R"), "R");
    s.horizon = get_or<long>(j, "T", 50, "T");
    s.gamma = get_or<double>(j, "gamma", 1.0, "gamma");
    s.action_clip = clip;
    cfg.env = s;
  } else if (env == "bandit") {
    allowed.insert({"dim", "lipschitz"});
    reject_unknown_keys(j, allowed, "config: ");
    BanditSpec s;
    if (j.contains("dim")) s.dim = get_count(j, "dim", "dim");
    s.lipschitz = get_or<double>(j, "lipschitz", 1.0, "lipschitz");
    s.horizon = get_or<long>(j, "T", 1, "T");
    s.gamma = get_or<double>(j, "gamma", 1.0, "gamma");
    s.action_clip = clip;
    cfg.env = s;
  } else {
    throw Error("env: unknown environment '" + env + "' (expected lqr|bandit)");
  }

  cfg.policy = policy_kind_from_string(get_or<std::string>(j, "policy", "linear", "policy"));
  cfg.algo = algo_from_string(get_field<std::string>(j, "algo", "algo"));

  const Json& noise = j.contains("noise") ? j.at("noise") : throw Error("noise: missing required key");
  require(noise.is_object(), "noise: must be an object");
  reject_unknown_keys(noise, {"kind", "sigma"}, "noise: ");
  cfg.noise_kind = noise_kind_from_string(get_or<std::string>(noise, "kind", "gaussian", "noise.kind"));
  cfg.sigma = get_field<double>(noise, "sigma", "noise.sigma");

  require(j.contains("iterations"), "iterations: missing required key");
  require(j.contains("batch_size"), "batch_size: missing required key");
  cfg.iterations = get_count(j, "iterations", "iterations");
  cfg.batch_size = get_count(j, "batch_size", "batch_size");
  cfg.optimizer.kind = optimizer_kind_from_string(get_field<std::string>(j, "optimizer", "optimizer"));
  cfg.optimizer.step_size = get_field<double>(j, "step_size", "step_size");
  if (j.contains("max_grad_norm")) cfg.optimizer.max_grad_norm = get_field<double>(j, "max_grad_norm", "max_grad_norm");
  require(j.contains("seed"), "seed: missing required key");
  require(j.at("seed").is_number_integer(), "seed: must be an integer");
  cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("eval_every")) cfg.eval_every = get_count(j, "eval_every", "eval_every");
  cfg.eval_episodes = j.contains("eval_episodes") ? get_count(j, "eval_episodes", "eval_episodes") : cfg.resolved_eval_episodes();
  if (j.contains("theta_init")) cfg.theta_init = get_field<Vec>(j, "theta_init", "theta_init");
  cfg.divergence_threshold = get_or<double>(j, "divergence_threshold", -1e9, "divergence_threshold");
  if (j.contains("sigma_sq_values")) cfg.sigma_sq_values = get_field<Vec>(j, "sigma_sq_values", "sigma_sq_values");
  if (j.contains("repeat_seeds")) cfg.repeat_seeds = get_count(j, "repeat_seeds", "repeat_seeds");
  cfg.record_wallclock = get_or<bool>(j, "record_wallclock", false, "record_wallclock");
  cfg.validate();
  return cfg;
}

/// Fully resolved config: every default is written out.
inline Json config_to_json(const ExperimentConfig& cfg) {
  Json j;
  std::optional<ActionClip> clip;
  if (const auto* lqr = std::get_if<LqrSpec>(&cfg.env)) {
    j["env"] = "lqr";
    j["A"] = detail::mat2_json(lqr->A);
    j["B"] = detail::mat2_json(lqr->B);
    j["Q"] = detail::mat2_json(lqr->Q);
    j["R"] = detail::mat2_json(lqr->R);
    j["T"] = lqr->horizon;
    j["gamma"] = lqr->gamma;
    clip = lqr->action_clip;
  } else {
    const auto& b = std::get<BanditSpec>(cfg.env);
    j["env"] = "bandit";
    j["dim"] = b.dim;
    j["lipschitz"] = b.lipschitz;
    j["T"] = b.horizon;
    j["gamma"] = b.gamma;
    clip = b.action_clip;
  }
  if (clip) j["action_clip"] = Json::array({clip->lo, clip->hi});
  j["policy"] = std::string(to_string(cfg.policy));
  j["algo"] = std::string(to_string(cfg.algo));
  j["noise"] = {{"kind", std::string(to_string(cfg.noise_kind))}, {"sigma", cfg.sigma}};
  j["iterations"] = cfg.iterations;
  j["batch_size"] = cfg.batch_size;
  j["optimizer"] = std::string(to_string(cfg.optimizer.kind));
  j["step_size"] = cfg.optimizer.step_size;
  if (cfg.optimizer.max_grad_norm) j["max_grad_norm"] = *cfg.optimizer.max_grad_norm;
  j["seed"] = cfg.seed;
  j["eval_every"] = cfg.eval_every;
  j["eval_episodes"] = cfg.resolved_eval_episodes();
  if (cfg.theta_init) j["theta_init"] = *cfg.theta_init;
  j["divergence_threshold"] = cfg.divergence_threshold;
  if (!cfg.sigma_sq_values.empty()) j["sigma_sq_values"] = cfg.sigma_sq_values;
  j["repeat_seeds"] = cfg.repeat_seeds;
  j["record_wallclock"] = cfg.record_wallclock;
  return j;
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), path + ": cannot open");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(path + ": malformed JSON: " + e.what());
  }
}

inline ExperimentConfig parse_config_json(Json j, const std::vector<std::string>& overrides) {
  for (const auto& o : overrides) apply_override(j, o);
  return config_from_json(j);
}

inline ExperimentConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
  return parse_config_json(read_json_file(path), overrides);
}

// --------------------------------------------------- regularity constants ----

/// Keys: L_p, L_r, L_2p, L_2r, L_mu, L_2mu, R_max, gamma, c (1), d_theta,
/// d_action, T (integer, or null / "inf" for an infinite horizon). The
/// optional "query" object sets the rate-table point (epsilon, sigma, alpha,
/// beta, J_gap) and the batch size N for step sizes.
struct ConstantsFile {
  RegularityConstants rc;
  RateQuery query;
  double n = 100.0;
};

inline ConstantsFile constants_from_json(const Json& j) {
  using detail::get_field;
  using detail::get_or;
  require(j.is_object(), "constants: top level must be an object");
  detail::reject_unknown_keys(j,
                              {"L_p", "L_r", "L_2p", "L_2r", "L_mu", "L_2mu", "R_max", "gamma", "c", "d_theta",
                               "d_action", "T", "query"},
                              "constants: ");
  ConstantsFile f;
  RegularityConstants& rc = f.rc;
  rc.L_p = get_field<double>(j, "L_p", "L_p");
  rc.L_r = get_field<double>(j, "L_r", "L_r");
  rc.L_2p = get_field<double>(j, "L_2p", "L_2p");
  rc.L_2r = get_field<double>(j, "L_2r", "L_2r");
  rc.L_mu = get_field<double>(j, "L_mu", "L_mu");
  rc.L_2mu = get_field<double>(j, "L_2mu", "L_2mu");
  rc.R_max = get_field<double>(j, "R_max", "R_max");
  rc.gamma = get_field<double>(j, "gamma", "gamma");
  rc.c = get_or<double>(j, "c", 1.0, "c");
  rc.d_theta = detail::get_count(j, "d_theta", "d_theta");
  rc.d_action = detail::get_count(j, "d_action", "d_action");
  if (j.contains("T") && !j.at("T").is_null() && !(j.at("T").is_string() && j.at("T") == "inf")) {
    require(j.at("T").is_number_integer(), "T: must be an integer, null or \"inf\"");
    rc.T = j.at("T").get<long>();
  }
  rc.validate();
  require(rc.d_theta >= 1 && rc.d_action >= 1, "d_theta, d_action: must be >= 1");
  if (j.contains("query")) {
    const Json& q = j.at("query");
    require(q.is_object(), "query: must be an object");
    detail::reject_unknown_keys(q, {"epsilon", "sigma", "alpha", "beta", "J_gap", "N"}, "query: ");
    f.query.epsilon = get_or<double>(q, "epsilon", f.query.epsilon, "query.epsilon");
    f.query.sigma = get_or<double>(q, "sigma", f.query.sigma, "query.sigma");
    f.query.alpha = get_or<double>(q, "alpha", f.query.alpha, "query.alpha");
    f.query.beta = get_or<double>(q, "beta", f.query.beta, "query.beta");
    f.query.j_gap = get_or<double>(q, "J_gap", f.query.j_gap, "query.J_gap");
    f.n = get_or<double>(q, "N", f.n, "query.N");
  }
  return f;
}

}  // namespace wnpg
