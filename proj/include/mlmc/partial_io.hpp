#pragma once

#include "mlmc/engine.hpp"

#include <filesystem>
#include <iosfwd>

namespace mlmc {

/// Text serialization of PartialSums, version 1:
///
///     MLMC-PARTIAL 1
///     mode full|entries
///     dimension <n>
///     worker <id> <count>
///     alpha <a>
///     t <t>
///     seed <root_seed>
///     paths <n_paths>
///     events <event_count>
///     values <m>
///     <index> <shift> <sum> <sum_sq>     (m lines)
///     end
///
/// Reals are written as shortest round-trip decimals, so reading back is
/// bitwise exact.
void write_partial(const PartialSums& p, std::ostream& out);
void write_partial(const PartialSums& p, const std::filesystem::path& path);

/// Throws ParseError (with line number) on a malformed record and on an
/// unknown magic or version.
PartialSums read_partial(std::istream& in);
PartialSums read_partial(const std::filesystem::path& path);

} // namespace mlmc
