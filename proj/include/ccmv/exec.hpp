#pragma once

namespace ccmv {

/// Selects the serial reference path or the OpenMP path of a data-parallel
/// kernel. Both paths produce bitwise-identical results.
enum class Exec { Serial, Parallel };

}  // namespace ccmv
