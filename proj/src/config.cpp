#include "cfg/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

namespace cfg {

namespace {

std::string join(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void reject_unknown(const Json& obj, const std::set<std::string>& allowed, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (!allowed.count(key)) throw ConfigError(join(path, key), "unknown key");
  }
}

const Json& require(const Json& obj, const std::string& key, const std::string& path) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key), "missing required key");
  return *it;
}

double as_double(const Json& v, const std::string& field) {
  if (!v.is_number()) throw ConfigError(field, "must be a number");
  return v.get<double>();
}

long as_long(const Json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ConfigError(field, "must be an integer");
  return v.get<long>();
}

std::uint64_t as_u64(const Json& v, const std::string& field) {
  if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<long long>() < 0)) {
    throw ConfigError(field, "must be a non-negative integer");
  }
  return v.get<std::uint64_t>();
}

bool as_bool(const Json& v, const std::string& field) {
  if (!v.is_boolean()) throw ConfigError(field, "must be true or false");
  return v.get<bool>();
}

std::string as_string(const Json& v, const std::string& field) {
  if (!v.is_string()) throw ConfigError(field, "must be a string");
  return v.get<std::string>();
}

// A scalar or an array of numbers.
Vec as_vec(const Json& v, const std::string& field) {
  if (v.is_number()) return Vec::Constant(1, v.get<double>());
  if (!v.is_array() || v.empty()) throw ConfigError(field, "must be a number or a nonempty array");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = as_double(v[i], field);
  return out;
}

Json vec_json(const Vec& v) {
  if (v.size() == 1) return v[0];
  Json arr = Json::array();
  for (double x : v) arr.push_back(x);
  return arr;
}

// A single width (two hidden layers of that width) or an explicit list.
std::vector<int> as_widths(const Json& v, const std::string& field) {
  if (v.is_number_integer()) {
    const int w = v.get<int>();
    return {w, w};
  }
  if (!v.is_array() || v.empty()) throw ConfigError(field, "must be an integer or an array of integers");
  std::vector<int> out;
  for (const auto& e : v) out.push_back(static_cast<int>(as_long(e, field)));
  return out;
}

template <typename Fn>
void optional_key(const Json& obj, const std::string& key, Fn&& fn) {
  if (auto it = obj.find(key); it != obj.end()) fn(*it);
}

}  // namespace

RunConfig config_from_json(const Json& j) {
  reject_unknown(j,
                 {"domain", "target", "N", "init", "f_hidden", "z_hidden", "lambda", "bandwidth", "L",
                  "L_inner", "alpha", "eta", "seed", "snapshot_every", "out_dir", "truth_path",
                  "use_boundary_term", "use_z_net", "reset_adam", "adam", "sinkhorn"},
                 "");
  RunConfig c;

  const Json& dom = require(j, "domain", "");
  reject_unknown(dom, {"name", "q", "r", "dim"}, "domain");
  c.domain.name = as_string(require(dom, "name", "domain"), "domain.name");
  optional_key(dom, "q", [&](const Json& v) { c.domain.q = as_double(v, "domain.q"); });
  optional_key(dom, "r", [&](const Json& v) { c.domain.r = as_double(v, "domain.r"); });
  optional_key(dom, "dim", [&](const Json& v) { c.domain.dim = static_cast<int>(as_long(v, "domain.dim")); });

  const Json& tgt = require(j, "target", "");
  c.target.name = as_string(require(tgt, "name", "target"), "target.name");
  if (c.target.name == "lasso") {
    reject_unknown(tgt, {"name", "seed", "s", "q"}, "target");
    optional_key(tgt, "seed", [&](const Json& v) { c.target.seed = as_u64(v, "target.seed"); });
    optional_key(tgt, "s", [&](const Json& v) { c.target.s = as_double(v, "target.s"); });
    optional_key(tgt, "q", [&](const Json& v) { c.target.q = as_double(v, "target.q"); });
  } else {
    reject_unknown(tgt, {"name"}, "target");
  }

  c.N = as_long(require(j, "N", ""), "N");

  const Json& init = require(j, "init", "");
  reject_unknown(init, {"gaussian", "uniform"}, "init");
  if (init.size() != 1) throw ConfigError("init", "must hold exactly one of gaussian, uniform");
  if (auto it = init.find("gaussian"); it != init.end()) {
    reject_unknown(*it, {"mean", "std"}, "init.gaussian");
    c.init.kind = InitSpec::Kind::Gaussian;
    c.init.mean = as_vec(require(*it, "mean", "init.gaussian"), "init.gaussian.mean");
    c.init.std = as_double(require(*it, "std", "init.gaussian"), "init.gaussian.std");
  } else {
    const Json& u = init.at("uniform");
    reject_unknown(u, {"low", "high"}, "init.uniform");
    c.init.kind = InitSpec::Kind::Uniform;
    c.init.low = as_vec(require(u, "low", "init.uniform"), "init.uniform.low");
    c.init.high = as_vec(require(u, "high", "init.uniform"), "init.uniform.high");
  }

  c.f_hidden = as_widths(require(j, "f_hidden", ""), "f_hidden");
  c.z_hidden = c.f_hidden;
  optional_key(j, "z_hidden", [&](const Json& v) { c.z_hidden = as_widths(v, "z_hidden"); });
  c.lambda = as_double(require(j, "lambda", ""), "lambda");

  const Json& bw = require(j, "bandwidth", "");
  if (bw.is_number()) {
    c.bandwidth.adaptive = false;
    c.bandwidth.h = bw.get<double>();
  } else {
    reject_unknown(bw, {"h", "h0", "adaptive"}, "bandwidth");
    c.bandwidth.adaptive = false;
    optional_key(bw, "adaptive", [&](const Json& v) { c.bandwidth.adaptive = as_bool(v, "bandwidth.adaptive"); });
    if (c.bandwidth.adaptive) {
      c.bandwidth.h0 = as_double(require(bw, "h0", "bandwidth"), "bandwidth.h0");
    } else {
      c.bandwidth.h = as_double(require(bw, "h", "bandwidth"), "bandwidth.h");
    }
  }

  c.L = as_long(require(j, "L", ""), "L");
  c.L_inner = as_long(require(j, "L_inner", ""), "L_inner");
  c.alpha = as_double(require(j, "alpha", ""), "alpha");
  c.eta = as_double(require(j, "eta", ""), "eta");
  c.seed = as_u64(require(j, "seed", ""), "seed");
  optional_key(j, "snapshot_every", [&](const Json& v) { c.snapshot_every = as_long(v, "snapshot_every"); });
  optional_key(j, "out_dir", [&](const Json& v) { c.out_dir = as_string(v, "out_dir"); });
  optional_key(j, "truth_path", [&](const Json& v) { c.truth_path = as_string(v, "truth_path"); });
  optional_key(j, "use_boundary_term",
               [&](const Json& v) { c.use_boundary_term = as_bool(v, "use_boundary_term"); });
  optional_key(j, "use_z_net", [&](const Json& v) { c.use_z_net = as_bool(v, "use_z_net"); });
  optional_key(j, "reset_adam", [&](const Json& v) { c.reset_adam = as_bool(v, "reset_adam"); });
  optional_key(j, "adam", [&](const Json& a) {
    reject_unknown(a, {"beta1", "beta2", "eps"}, "adam");
    optional_key(a, "beta1", [&](const Json& v) { c.adam.beta1 = as_double(v, "adam.beta1"); });
    optional_key(a, "beta2", [&](const Json& v) { c.adam.beta2 = as_double(v, "adam.beta2"); });
    optional_key(a, "eps", [&](const Json& v) { c.adam.eps = as_double(v, "adam.eps"); });
  });
  optional_key(j, "sinkhorn", [&](const Json& s) {
    reject_unknown(s, {"eps_rel", "max_iter", "tol", "debiased"}, "sinkhorn");
    optional_key(s, "eps_rel", [&](const Json& v) { c.sinkhorn.eps_rel = as_double(v, "sinkhorn.eps_rel"); });
    optional_key(s, "max_iter",
                 [&](const Json& v) { c.sinkhorn.max_iter = static_cast<int>(as_long(v, "sinkhorn.max_iter")); });
    optional_key(s, "tol", [&](const Json& v) { c.sinkhorn.tol = as_double(v, "sinkhorn.tol"); });
    optional_key(s, "debiased", [&](const Json& v) { c.sinkhorn.debiased = as_bool(v, "sinkhorn.debiased"); });
  });

  c.validate();
  return c;
}

Json config_to_json(const RunConfig& c) {
  Json j;
  Json dom{{"name", c.domain.name}};
  if (c.domain.q) dom["q"] = *c.domain.q;
  if (c.domain.r) dom["r"] = *c.domain.r;
  if (c.domain.dim) dom["dim"] = *c.domain.dim;
  j["domain"] = dom;
  Json tgt{{"name", c.target.name}};
  if (c.target.name == "lasso") {
    tgt["seed"] = c.target.seed;
    tgt["s"] = c.target.s;
    tgt["q"] = c.target.q;
  }
  j["target"] = tgt;
  j["N"] = c.N;
  if (c.init.kind == InitSpec::Kind::Gaussian) {
    j["init"] = {{"gaussian", {{"mean", vec_json(c.init.mean.size() ? c.init.mean : Vec::Zero(1))},
                               {"std", c.init.std}}}};
  } else {
    j["init"] = {{"uniform", {{"low", vec_json(c.init.low)}, {"high", vec_json(c.init.high)}}}};
  }
  j["f_hidden"] = c.f_hidden;
  j["z_hidden"] = c.z_hidden;
  j["lambda"] = c.lambda;
  if (c.bandwidth.adaptive) {
    j["bandwidth"] = {{"h0", c.bandwidth.h0}, {"adaptive", true}};
  } else {
    j["bandwidth"] = c.bandwidth.h;
  }
  j["L"] = c.L;
  j["L_inner"] = c.L_inner;
  j["alpha"] = c.alpha;
  j["eta"] = c.eta;
  j["seed"] = c.seed;
  j["snapshot_every"] = c.snapshot_every;
  j["out_dir"] = c.out_dir;
  if (!c.truth_path.empty()) j["truth_path"] = c.truth_path;
  j["use_boundary_term"] = c.use_boundary_term;
  j["use_z_net"] = c.use_z_net;
  j["reset_adam"] = c.reset_adam;
  j["adam"] = {{"beta1", c.adam.beta1}, {"beta2", c.adam.beta2}, {"eps", c.adam.eps}};
  j["sinkhorn"] = {{"eps_rel", c.sinkhorn.eps_rel}, {"max_iter", c.sinkhorn.max_iter}, {"tol", c.sinkhorn.tol},
                   {"debiased", c.sinkhorn.debiased}};
  return j;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config", "cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ConfigError("config", std::string("invalid JSON: ") + e.what());
  }
}

void apply_override(Json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override", "expected key=value, got '" + assignment + "'");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  Json value;
  try {
    value = Json::parse(raw);
  } catch (const Json::parse_error&) {
    value = raw;
  }
  std::string pointer = "/" + key;
  for (auto& ch : pointer) {
    if (ch == '.') ch = '/';
  }
  try {
    j[Json::json_pointer(pointer)] = value;
  } catch (const Json::exception&) {
    throw ConfigError(key, "cannot set '" + key + "': a parent key is not an object");
  }
}

}  // namespace cfg
