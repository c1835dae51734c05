#pragma once

#include <string>
#include <vector>

#include "wcgl/config.hpp"
#include "wcgl/solver.hpp"

namespace wcgl {

struct CheckpointError : std::runtime_error {
    explicit CheckpointError(const std::string& msg) : std::runtime_error(msg) {}
};

// Binary container (all integers and floats little-endian):
//   "WCGL" | u32 version=1 | u32 config_len | config UTF-8 echo
//   | u32 n_states
//   | per state: f64 t, f64 start, coefficient payload (v then Z, each
//     (2N+1)^2 f64 pairs in row-major k-order)
//   | per state: u64 seed, u32 rng_step
// save -> load -> save is byte-identical; a resumed trajectory is
// bit-identical to an unbroken one.
struct CheckpointData {
    RunConfig config;
    std::string config_echo;
    std::vector<SolverState> states;
};

void save_checkpoint(const std::vector<SolverState>& states, const RunConfig& cfg,
                     const std::string& path);
CheckpointData load_checkpoint(const std::string& path);

}  // namespace wcgl
