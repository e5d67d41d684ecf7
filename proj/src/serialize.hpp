#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "demos.hpp"
#include "mdp.hpp"
#include "solvers.hpp"

namespace ildm {

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// FNV-1a over the structural fields and the IEEE bytes of every
/// probability and reward. Identifies the MDP a demo set was drawn from.
uint64_t mdp_hash(const LayeredMdp& mdp);
std::string hash_string(uint64_t h);  // 16 lowercase hex digits

std::string mdp_to_json(const LayeredMdp& mdp);
LayeredMdp mdp_from_json(const std::string& text);

std::string policy_to_json(const TabularPolicy& pi, const LayeredMdp& mdp);
TabularPolicy policy_from_json(const std::string& text, const LayeredMdp& mdp);

std::string demos_to_json(const DemoDataset& demo, const LayeredMdp& mdp);
/// Rejects files whose stamped hash does not match `mdp`, then rebuilds the
/// count caches.
DemoDataset demos_from_json(const std::string& text, const LayeredMdp& mdp);

std::string result_to_json(const SolveResult& res, const LayeredMdp& mdp);
std::string trace_csv(const SolveResult& res);

/// Shortest decimal form that parses back to the same double; non-finite
/// values render as nan/inf for CSV cells.
std::string num_str(double x);

std::string read_file(const std::string& path);
void write_file(const std::string& path, const std::string& text);

}  // namespace ildm
