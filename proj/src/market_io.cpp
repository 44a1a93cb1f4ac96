#include "factorbt/market_io.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "factorbt/csv.hpp"
#include "factorbt/error.hpp"

namespace factorbt {

namespace {

constexpr std::string_view kIndustryPrefix = "INDUSTRY:";

struct RawAsset {
  std::map<Date, std::array<double, 4>> rows;  // close, volume, pe, pb
};

std::size_t day_index(const std::vector<Date>& calendar, Date d) {
  return static_cast<std::size_t>(std::lower_bound(calendar.begin(), calendar.end(), d) - calendar.begin());
}

std::vector<double> absent_if_empty(std::vector<double> column) {
  if (std::all_of(column.begin(), column.end(), [](double v) { return std::isnan(v); })) {
    column.clear();
  }
  return column;
}

}  // namespace

MarketPanel load_panel(const std::filesystem::path& prices_path, const std::filesystem::path& index_path) {
  const auto price_rows = csv::read_file(prices_path, kPricesHeader);
  const auto index_rows = csv::read_file(index_path, kIndexHeader);

  std::set<Date> days;
  std::vector<std::string> asset_order;
  std::map<std::string, RawAsset> assets;
  for (const auto& row : price_rows) {
    const Date d = Date::from_iso(row[0]);
    days.insert(d);
    auto [it, inserted] = assets.try_emplace(row[1]);
    if (inserted) {
      asset_order.push_back(row[1]);
    }
    std::array<double, 4> values{};
    for (std::size_t i = 0; i < 4; ++i) {
      values[i] = csv::parse_double(row[i + 2]);
    }
    if (!it->second.rows.emplace(d, values).second) {
      throw Error(ErrorCode::ParseError, "duplicate row for " + row[1] + " on " + row[0]);
    }
  }

  std::vector<std::string> index_order;
  std::map<std::string, std::map<Date, double>> indices;
  for (const auto& row : index_rows) {
    const Date d = Date::from_iso(row[0]);
    days.insert(d);
    const std::string& id = row[1];
    if (id != "MARKET" && id.rfind(kIndustryPrefix, 0) != 0) {
      throw Error(ErrorCode::ParseError, "unknown index id '" + id + "'");
    }
    auto [it, inserted] = indices.try_emplace(id);
    if (inserted) {
      index_order.push_back(id);
    }
    if (!it->second.emplace(d, csv::parse_double(row[2])).second) {
      throw Error(ErrorCode::ParseError, "duplicate row for " + id + " on " + row[0]);
    }
  }
  if (!indices.contains("MARKET")) {
    throw Error(ErrorCode::ParseError, "index file has no MARKET series");
  }

  MarketPanel panel;
  panel.calendar.assign(days.begin(), days.end());
  const std::size_t n_days = panel.calendar.size();
  auto index_column = [&](const std::map<Date, double>& series) {
    std::vector<double> col(n_days, kMissing);
    for (const auto& [d, v] : series) {
      col[day_index(panel.calendar, d)] = v;
    }
    return col;
  };

  panel.market = IndexRecord{"MARKET", index_column(indices.at("MARKET"))};
  for (const auto& id : index_order) {
    if (id != "MARKET") {
      panel.industries.push_back(IndexRecord{id.substr(kIndustryPrefix.size()), index_column(indices.at(id))});
    }
  }

  for (const auto& id : asset_order) {
    AssetRecord rec;
    rec.asset_id = id;
    const auto dot = id.find('.');
    if (dot != std::string::npos) {
      rec.industry = id.substr(0, dot);
    } else if (panel.industries.size() == 1) {
      rec.industry = panel.industries.front().index_id;
    }
    std::array<std::vector<double>, 4> cols;
    for (auto& c : cols) {
      c.assign(n_days, kMissing);
    }
    for (const auto& [d, values] : assets.at(id).rows) {
      const std::size_t t = day_index(panel.calendar, d);
      for (std::size_t i = 0; i < 4; ++i) {
        cols[i][t] = values[i];
      }
    }
    rec.close = std::move(cols[0]);
    rec.volume = std::move(cols[1]);
    rec.pe_ratio = absent_if_empty(std::move(cols[2]));
    rec.pb_ratio = absent_if_empty(std::move(cols[3]));
    panel.assets.push_back(std::move(rec));
  }
  return panel;
}

std::string prices_csv(const MarketPanel& panel) {
  std::string out = std::string(kPricesHeader) + "\n";
  auto cell = [](const std::vector<double>& col, std::size_t t) {
    return t < col.size() ? csv::format_double(col[t]) : std::string();
  };
  for (std::size_t t = 0; t < panel.num_days(); ++t) {
    const std::string date = panel.calendar[t].to_iso();
    for (const auto& a : panel.assets) {
      out += date;
      out += ',' + a.asset_id;
      out += ',' + cell(a.close, t);
      out += ',' + cell(a.volume, t);
      out += ',' + cell(a.pe_ratio, t);
      out += ',' + cell(a.pb_ratio, t);
      out += '\n';
    }
  }
  return out;
}

std::string index_csv(const MarketPanel& panel) {
  std::string out = std::string(kIndexHeader) + "\n";
  for (std::size_t t = 0; t < panel.num_days(); ++t) {
    const std::string date = panel.calendar[t].to_iso();
    out += date + ",MARKET," + csv::format_double(panel.market.close[t]) + '\n';
    for (const auto& idx : panel.industries) {
      out += date + ',' + std::string(kIndustryPrefix) + idx.index_id + ',' +
             csv::format_double(idx.close[t]) + '\n';
    }
  }
  return out;
}

void save_panel(const MarketPanel& panel, const std::filesystem::path& prices_path,
                const std::filesystem::path& index_path) {
  csv::write_file(prices_path, prices_csv(panel));
  csv::write_file(index_path, index_csv(panel));
}

}  // namespace factorbt
