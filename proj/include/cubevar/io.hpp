#pragma once

// Binary grid files and the small text manifests that tie them together.
//
// Grid file: "CUBEVAR1", u32 d, u32 dims[d], f64 h, f64 origin[d],
// f64 values[prod dims], all little-endian, values row-major.

#include <filesystem>
#include <string>

#include "cubevar/analytic.hpp"
#include "cubevar/core.hpp"
#include "cubevar/ergodic.hpp"
#include "cubevar/forms.hpp"

namespace cubevar {

namespace fs = std::filesystem;

void store_grid(const GridFunction& f, const fs::path& path);
GridFunction load_grid(const fs::path& path);

/// Key-value text: size, d, weights, then one "map<l>" line per axis.
void store_system(const FiniteSystem& sys, const fs::path& path);
FiniteSystem load_system(const fs::path& path);

/// Tuple of functions on X: "d", then one "f<bits>" line of values each.
void store_system_tuple(const SystemTuple& f, const fs::path& path);
SystemTuple load_system_tuple(const fs::path& path);

/// Manifest "kind tuple" with one grid file per nonzero index, written next
/// to the manifest as <stem>_j<bits>.grid.
void store_tuple(const FunctionTuple& F, const fs::path& manifest);
FunctionTuple load_tuple(const fs::path& manifest);

/// Manifest "kind sequence", one grid file per index.
void store_sequence(const AverageSequence& seq, const fs::path& manifest);
AverageSequence load_sequence(const fs::path& manifest);

/// Sidecar "kind profile" plus the 1-D sample grid.
void store_profile(const Profile& p, const fs::path& manifest);
Profile load_profile(const fs::path& manifest);

/// Manifest "kind kernel" with provenance, plus the kernel grid.
void store_kernel(const Kernel& K, const fs::path& manifest);
Kernel load_kernel(const fs::path& manifest);

}  // namespace cubevar
