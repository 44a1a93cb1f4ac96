#pragma once

#include <filesystem>
#include <string>

#include "factorbt/marketdata.hpp"

namespace factorbt {

inline constexpr const char* kPricesHeader = "date,asset_id,close,volume,pe_ratio,pb_ratio";
inline constexpr const char* kIndexHeader = "date,index_id,close";

/// Reads the prices and index CSVs into a raw (possibly gappy) panel.
///
/// The calendar is the sorted union of all dates. An asset belongs to the
/// industry named by the part of its id before the first '.', or to the only
/// industry index when there is exactly one. An all-empty P/E or P/B column
/// is treated as an absent fundamental.
MarketPanel load_panel(const std::filesystem::path& prices_csv, const std::filesystem::path& index_csv);

std::string prices_csv(const MarketPanel& panel);
std::string index_csv(const MarketPanel& panel);

void save_panel(const MarketPanel& panel, const std::filesystem::path& prices_path,
                const std::filesystem::path& index_path);

}  // namespace factorbt
