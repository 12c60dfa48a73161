#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>

#include "ddempc/hankel.hpp"

namespace ddempc {

/// Writes `k,u_1..u_m,y_1..y_p[,l]` with 17 significant digits.
void write_dataset_csv(std::ostream& os, const DataTrajectoryd& data);
void write_dataset_csv(const std::string& path, const DataTrajectoryd& data);

/// Channel counts are taken from the header.
DataTrajectoryd read_dataset_csv(std::istream& is);
DataTrajectoryd read_dataset_csv(const std::string& path);

/// FNV-1a of the canonical CSV encoding; identifies a dataset in run logs.
std::uint64_t dataset_fingerprint(const DataTrajectoryd& data);

/// Decimal form with up to 17 significant digits (exact round trip).
std::string format_number(double v);

}  // namespace ddempc
