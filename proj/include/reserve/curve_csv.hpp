#pragma once
/**
 * @file curve_csv.hpp
 * @brief CSV emission of sweep results — the CLI's output format.
 *
 * Header: n,alpha,price,superrep,gap,u_no_claim,iterations
 * One row per schedule point. Doubles are printed with 17 significant
 * digits so reading the file back reproduces the in-memory values exactly.
 * Output is byte-identical for identical inputs and written atomically
 * (temp file + rename); a failed write leaves no partial file behind.
 */

#include <string>

#include "reserve/pricing.hpp"

namespace reserve::pricing {

std::string curve_to_csv(const PriceCurve& curve);

/// Atomic write: temp file in the target directory, then rename.
void write_curve_csv(const std::string& path, const PriceCurve& curve);

/// Parses a curve CSV back (claim name and z are not part of the format).
PriceCurve read_curve_csv(const std::string& path);

}  // namespace reserve::pricing
