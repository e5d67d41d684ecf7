#include "serialize.hpp"

#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace ildm {

using Json = nlohmann::ordered_json;

namespace {

void hash_bytes(uint64_t& h, const void* data, size_t n) {
  const auto* p = static_cast<const unsigned char*>(data);
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
}

void hash_u64(uint64_t& h, uint64_t v) { hash_bytes(h, &v, sizeof(v)); }

void hash_double(uint64_t& h, double v) {
  uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  hash_u64(h, bits);
}

const Json& require(const Json& j, const char* key, const char* what) {
  if (!j.is_object()) throw ParseError(std::string(what) + ": expected a JSON object");
  auto it = j.find(key);
  if (it == j.end()) throw ParseError(std::string(what) + ": missing field '" + key + "'");
  return *it;
}

int require_int(const Json& j, const char* key, const char* what) {
  const Json& v = require(j, key, what);
  if (!v.is_number_integer()) {
    throw ParseError(std::string(what) + ": field '" + key + "' must be an integer");
  }
  return v.get<int>();
}

Json parse_text(const std::string& text, const char* what) {
  try {
    return Json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string(what) + ": " + e.what());
  }
}

// [h][s][a] nested arrays <-> flat per-step tables.
Json tables_to_json(const std::vector<Layer>& tables, const std::vector<int>& layer_sizes,
                    int num_actions) {
  Json out = Json::array();
  for (size_t h = 0; h < tables.size(); ++h) {
    Json step = Json::array();
    for (int s = 0; s < layer_sizes[h]; ++s) {
      Json row = Json::array();
      for (int a = 0; a < num_actions; ++a) {
        row.push_back(tables[h][static_cast<size_t>(s) * num_actions + a]);
      }
      step.push_back(std::move(row));
    }
    out.push_back(std::move(step));
  }
  return out;
}

std::vector<Layer> tables_from_json(const Json& j, const std::vector<int>& layer_sizes,
                                    int num_actions, size_t steps, const char* what) {
  if (!j.is_array() || j.size() != steps) {
    throw ParseError(std::string(what) + ": expected " + std::to_string(steps) +
                     " per-step tables");
  }
  std::vector<Layer> out(steps);
  for (size_t h = 0; h < steps; ++h) {
    const Json& step = j[h];
    if (!step.is_array() || static_cast<int>(step.size()) != layer_sizes[h]) {
      throw ParseError(std::string(what) + ": step " + std::to_string(h + 1) +
                       " has the wrong number of states");
    }
    out[h].resize(static_cast<size_t>(layer_sizes[h]) * num_actions);
    for (int s = 0; s < layer_sizes[h]; ++s) {
      const Json& row = step[s];
      if (!row.is_array() || static_cast<int>(row.size()) != num_actions) {
        throw ParseError(std::string(what) + ": step " + std::to_string(h + 1) + " state " +
                         std::to_string(s + 1) + " has the wrong number of actions");
      }
      for (int a = 0; a < num_actions; ++a) {
        if (!row[a].is_number()) {
          throw ParseError(std::string(what) + ": non-numeric entry at step " +
                           std::to_string(h + 1));
        }
        out[h][static_cast<size_t>(s) * num_actions + a] = row[a].get<double>();
      }
    }
  }
  return out;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace

uint64_t mdp_hash(const LayeredMdp& mdp) {
  uint64_t h = 0xcbf29ce484222325ull;
  hash_u64(h, static_cast<uint64_t>(mdp.horizon));
  hash_u64(h, static_cast<uint64_t>(mdp.num_actions));
  for (int s : mdp.layer_sizes) hash_u64(h, static_cast<uint64_t>(s));
  for (double v : mdp.initial) hash_double(h, v);
  for (const auto& layer : mdp.transitions)
    for (double v : layer) hash_double(h, v);
  for (const auto& layer : mdp.reward)
    for (double v : layer) hash_double(h, v);
  return h;
}

std::string hash_string(uint64_t h) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string mdp_to_json(const LayeredMdp& mdp) {
  Json j;
  j["horizon"] = mdp.horizon;
  j["layer_sizes"] = mdp.layer_sizes;
  j["num_actions"] = mdp.num_actions;
  j["initial"] = mdp.initial;
  Json trans = Json::array();
  for (int h = 0; h + 1 < mdp.horizon; ++h) {
    Json step = Json::array();
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      Json rows = Json::array();
      for (int a = 0; a < mdp.num_actions; ++a) {
        Json row = Json::array();
        for (int s2 = 0; s2 < mdp.layer_sizes[h + 1]; ++s2) {
          row.push_back(mdp.trans(h, s, a, s2));
        }
        rows.push_back(std::move(row));
      }
      step.push_back(std::move(rows));
    }
    trans.push_back(std::move(step));
  }
  j["transitions"] = std::move(trans);
  j["reward"] = tables_to_json(mdp.reward, mdp.layer_sizes, mdp.num_actions);
  return dump(j);
}

LayeredMdp mdp_from_json(const std::string& text) {
  Json j = parse_text(text, "MDP file");
  LayeredMdp mdp;
  mdp.horizon = require_int(j, "horizon", "MDP file");
  mdp.num_actions = require_int(j, "num_actions", "MDP file");
  const Json& ls = require(j, "layer_sizes", "MDP file");
  if (!ls.is_array()) throw ParseError("MDP file: layer_sizes must be an array");
  for (const auto& v : ls) {
    if (!v.is_number_integer()) throw ParseError("MDP file: layer_sizes must hold integers");
    mdp.layer_sizes.push_back(v.get<int>());
  }
  if (mdp.horizon < 1 || static_cast<int>(mdp.layer_sizes.size()) != mdp.horizon) {
    throw ParseError("MDP file: layer_sizes length must equal horizon");
  }
  const Json& init = require(j, "initial", "MDP file");
  if (!init.is_array() || static_cast<int>(init.size()) != mdp.layer_sizes[0]) {
    throw ParseError("MDP file: initial distribution has the wrong length");
  }
  for (const auto& v : init) {
    if (!v.is_number()) throw ParseError("MDP file: non-numeric initial probability");
    mdp.initial.push_back(v.get<double>());
  }

  const Json& trans = require(j, "transitions", "MDP file");
  if (!trans.is_array() || static_cast<int>(trans.size()) != mdp.horizon - 1) {
    throw ParseError("MDP file: expected " + std::to_string(mdp.horizon - 1) +
                     " transition steps");
  }
  mdp.transitions.resize(mdp.horizon - 1);
  for (int h = 0; h + 1 < mdp.horizon; ++h) {
    const Json& step = trans[h];
    const int S = mdp.layer_sizes[h];
    const int S2 = mdp.layer_sizes[h + 1];
    if (!step.is_array() || static_cast<int>(step.size()) != S) {
      throw ParseError("MDP file: transition step " + std::to_string(h + 1) +
                       " has the wrong number of states");
    }
    mdp.transitions[h].resize(static_cast<size_t>(S) * mdp.num_actions * S2);
    for (int s = 0; s < S; ++s) {
      const Json& rows = step[s];
      if (!rows.is_array() || static_cast<int>(rows.size()) != mdp.num_actions) {
        throw ParseError("MDP file: transition step " + std::to_string(h + 1) + " state " +
                         std::to_string(s + 1) + " has the wrong number of actions");
      }
      for (int a = 0; a < mdp.num_actions; ++a) {
        const Json& row = rows[a];
        if (!row.is_array() || static_cast<int>(row.size()) != S2) {
          throw ParseError("MDP file: transition row at step " + std::to_string(h + 1) +
                           " has the wrong successor count");
        }
        for (int s2 = 0; s2 < S2; ++s2) {
          if (!row[s2].is_number()) {
            throw ParseError("MDP file: non-numeric transition probability");
          }
          mdp.transitions[h][(static_cast<size_t>(s) * mdp.num_actions + a) * S2 + s2] =
              row[s2].get<double>();
        }
      }
    }
  }
  mdp.reward = tables_from_json(require(j, "reward", "MDP file"), mdp.layer_sizes,
                                mdp.num_actions, mdp.horizon, "MDP file reward");
  validate_mdp(mdp);
  return mdp;
}

std::string policy_to_json(const TabularPolicy& pi, const LayeredMdp& mdp) {
  Json j;
  j["horizon"] = mdp.horizon;
  j["layer_sizes"] = mdp.layer_sizes;
  j["num_actions"] = mdp.num_actions;
  j["probs"] = tables_to_json(pi.probs, mdp.layer_sizes, mdp.num_actions);
  return dump(j);
}

TabularPolicy policy_from_json(const std::string& text, const LayeredMdp& mdp) {
  Json j = parse_text(text, "policy file");
  if (require_int(j, "horizon", "policy file") != mdp.horizon ||
      require_int(j, "num_actions", "policy file") != mdp.num_actions) {
    throw ParseError("policy file: shape does not match the MDP");
  }
  TabularPolicy pi;
  pi.probs = tables_from_json(require(j, "probs", "policy file"), mdp.layer_sizes,
                              mdp.num_actions, mdp.horizon, "policy file probs");
  for (int h = 0; h < mdp.horizon; ++h) {
    for (int s = 0; s < mdp.layer_sizes[h]; ++s) {
      double sum = 0.0;
      for (int a = 0; a < mdp.num_actions; ++a) {
        double p = pi.probs[h][static_cast<size_t>(s) * mdp.num_actions + a];
        if (p < 0.0) throw ParseError("policy file: negative probability");
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9) {
        throw ParseError("policy file: row at step " + std::to_string(h + 1) + " state " +
                         std::to_string(s + 1) + " sums to " + num_str(sum));
      }
    }
  }
  return pi;
}

std::string demos_to_json(const DemoDataset& demo, const LayeredMdp& mdp) {
  Json j;
  j["mdp_hash"] = hash_string(mdp_hash(mdp));
  j["seed"] = demo.seed;
  j["num_trajectories"] = demo.num_trajectories;
  Json trajs = Json::array();
  for (const auto& traj : demo.trajectories) {
    Json t = Json::array();
    for (const auto& [s, a] : traj.steps) t.push_back(Json::array({s, a}));
    trajs.push_back(std::move(t));
  }
  j["trajectories"] = std::move(trajs);
  return dump(j);
}

DemoDataset demos_from_json(const std::string& text, const LayeredMdp& mdp) {
  Json j = parse_text(text, "demo file");
  const Json& hash = require(j, "mdp_hash", "demo file");
  if (!hash.is_string() || hash.get<std::string>() != hash_string(mdp_hash(mdp))) {
    throw ParseError("demo file: mdp_hash does not match the MDP it is being loaded against");
  }
  DemoDataset demo;
  demo.mdp_hash = hash.get<std::string>();
  const Json& seed = require(j, "seed", "demo file");
  if (!seed.is_number_unsigned() && !seed.is_number_integer()) {
    throw ParseError("demo file: seed must be an integer");
  }
  demo.seed = seed.get<uint64_t>();
  const Json& trajs = require(j, "trajectories", "demo file");
  if (!trajs.is_array() || trajs.empty()) {
    throw ParseError("demo file: trajectories must be a nonempty array");
  }
  for (const auto& t : trajs) {
    if (!t.is_array()) throw ParseError("demo file: each trajectory must be an array");
    Trajectory traj;
    for (const auto& step : t) {
      if (!step.is_array() || step.size() != 2 || !step[0].is_number_integer() ||
          !step[1].is_number_integer()) {
        throw ParseError("demo file: each step must be an [state, action] pair");
      }
      traj.steps.emplace_back(step[0].get<int>(), step[1].get<int>());
    }
    demo.trajectories.push_back(std::move(traj));
  }
  demo.num_trajectories = static_cast<int>(demo.trajectories.size());
  if (j.contains("num_trajectories") &&
      j["num_trajectories"].get<int>() != demo.num_trajectories) {
    throw ParseError("demo file: num_trajectories does not match the trajectory list");
  }
  rebuild_demo_caches(demo, mdp);
  return demo;
}

std::string result_to_json(const SolveResult& res, const LayeredMdp& mdp) {
  Json j;
  j["method"] = method_name(res.method);
  Json cfg;
  cfg["alpha"] = res.config.alpha;
  cfg["learning_rate"] = res.config.learning_rate;
  cfg["max_iters"] = res.config.max_iters;
  cfg["grad_tol"] = res.config.grad_tol;
  cfg["beta"] = res.config.beta;
  cfg["polyak_tau"] = res.config.polyak_tau;
  cfg["online_rollouts_per_iter"] = res.config.online_rollouts_per_iter;
  cfg["seed"] = res.config.seed;
  cfg["q_init"] = res.config.q_init;
  if (res.config.q_box_C.has_value()) {
    cfg["q_box_C"] = *res.config.q_box_C;
  } else {
    cfg["q_box_C"] = nullptr;
  }
  j["config"] = std::move(cfg);
  j["converged"] = res.converged;
  j["iters"] = res.iters;
  j["final_objective"] = res.final_objective;
  j["final_grad_norm"] = res.final_grad_norm;
  j["policy"] = tables_to_json(res.policy.probs, mdp.layer_sizes, mdp.num_actions);
  if (res.reward.has_value()) {
    j["reward"] = tables_to_json(res.reward->r, mdp.layer_sizes, mdp.num_actions);
  }
  if (res.q.has_value()) {
    Json q;
    q["alpha"] = res.q->alpha;
    q["q"] = tables_to_json(res.q->q, mdp.layer_sizes, mdp.num_actions);
    j["q"] = std::move(q);
  }
  return dump(j);
}

std::string trace_csv(const SolveResult& res) {
  std::string out = "iter,objective,grad_norm\n";
  for (const auto& row : res.trace) {
    out += std::to_string(row.iter);
    out += ',';
    out += num_str(row.objective);
    out += ',';
    out += num_str(row.grad_norm);
    out += '\n';
  }
  return out;
}

std::string num_str(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return Json(x).dump();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "' for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failure on '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open '" + path + "' for writing");
  out << text;
  out.flush();
  if (!out) throw IoError("write failure on '" + path + "'");
}

}  // namespace ildm
