#include "splitlab/cli/results.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <optional>
#include <set>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace splitlab::cli {

namespace {

enum class Better { none, higher, lower };

Better better_for(std::string_view column) {
  static const std::set<std::string_view> higher = {"auroc", "auprc", "f1", "kappa"};
  static const std::set<std::string_view> lower = {"wall_s_per_epoch", "bytes_train",
                                                   "bytes_eval",       "bytes_model_sync",
                                                   "flops_server",     "flops_avg_client",
                                                   "flops_averaging"};
  if (higher.contains(column)) return Better::higher;
  if (lower.contains(column)) return Better::lower;
  return Better::none;
}

std::optional<double> to_number(const std::string& cell) {
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) return std::nullopt;
  return v;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  for (char c : line) {
    if (c == ',') {
      out.push_back(std::move(cell));
      cell.clear();
    } else if (c != '\r') {
      cell.push_back(c);
    }
  }
  out.push_back(std::move(cell));
  return out;
}

std::string real(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

const std::vector<std::string>& csv_columns() {
  static const std::vector<std::string> columns = {
      "method",           "seed",         "auroc",           "auprc",
      "f1",               "kappa",        "epochs",          "wall_s_per_epoch",
      "bytes_train",      "bytes_eval",   "bytes_model_sync", "flops_server",
      "flops_avg_client", "flops_averaging", "best_epoch"};
  return columns;
}

std::string csv_header() { return fmt::format("{}", fmt::join(csv_columns(), ",")); }

std::string csv_row(const proto::MetricsReport& r) {
  return fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}", method_id(r.method), r.seed,
                     real(r.auroc), real(r.auprc), real(r.f1), real(r.kappa), r.epochs,
                     real(r.wall_s_per_epoch), r.bytes_train, r.bytes_eval, r.bytes_model_sync,
                     r.flops_server, real(r.flops_avg_client), r.flops_averaging, r.best_epoch);
}

void append_results(const std::filesystem::path& path,
                    std::span<const proto::MetricsReport> reports) {
  bool need_header = true;
  if (std::filesystem::exists(path) && std::filesystem::file_size(path) > 0) {
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    if (!first.empty() && first.back() == '\r') first.pop_back();
    if (first != csv_header()) {
      throw SchemaError(path.string() + ": existing header does not match the results schema");
    }
    need_header = false;
  }
  std::ofstream out(path, std::ios::app);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (need_header) out << csv_header() << '\n';
  for (const auto& r : reports) out << csv_row(r) << '\n';
  if (!out) throw std::runtime_error("failed writing " + path.string());
}

ResultTable read_results(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SchemaError("cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(path.string() + ": empty file");
  ResultTable table;
  table.columns = split_csv(line);
  if (table.columns != csv_columns()) {
    throw SchemaError(path.string() + ": header does not match the results schema (expected " +
                      csv_header() + ")");
  }
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto cells = split_csv(line);
    if (cells.size() != table.columns.size()) {
      throw SchemaError(fmt::format("{}:{}: expected {} fields, found {}", path.string(), line_no,
                                    table.columns.size(), cells.size()));
    }
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (!to_number(cells[c])) {
        throw SchemaError(fmt::format("{}:{}: column {} is not numeric", path.string(), line_no,
                                      table.columns[c]));
      }
    }
    table.rows.push_back(std::move(cells));
  }
  return table;
}

std::vector<std::vector<bool>> best_flags(const ResultTable& table) {
  std::vector<std::vector<bool>> flags(table.rows.size(),
                                       std::vector<bool>(table.columns.size(), false));
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    const Better dir = better_for(table.columns[c]);
    if (dir == Better::none || table.rows.empty()) continue;
    std::optional<double> best;
    for (const auto& row : table.rows) {
      const double v = *to_number(row[c]);
      if (!best || (dir == Better::higher ? v > *best : v < *best)) best = v;
    }
    for (std::size_t r = 0; r < table.rows.size(); ++r) {
      flags[r][c] = *to_number(table.rows[r][c]) == *best;
    }
  }
  return flags;
}

std::string render_table(const ResultTable& table) {
  const auto flags = best_flags(table);
  std::vector<std::vector<std::string>> cells(table.rows.size());
  std::vector<std::size_t> width(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) width[c] = table.columns[c].size();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      std::string text = table.rows[r][c];
      if (c > 0 && table.columns[c] != "seed") {
        const double v = *to_number(text);
        text = fmt::format("{:.6g}", v);
      }
      if (flags[r][c]) text += "*";
      width[c] = std::max(width[c], text.size());
      cells[r].push_back(std::move(text));
    }
  }
  std::string out;
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    out += fmt::format(fmt::runtime(c == 0 ? "{:<{}}" : "  {:>{}}"), table.columns[c], width[c]);
  }
  out += '\n';
  for (const auto& row : cells) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      out += fmt::format(fmt::runtime(c == 0 ? "{:<{}}" : "  {:>{}}"), row[c], width[c]);
    }
    out += '\n';
  }
  out += "* best value in column\n";
  return out;
}

std::string render_json(const ResultTable& table) {
  const auto flags = best_flags(table);
  nlohmann::json rows = nlohmann::json::array();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    nlohmann::json obj;
    nlohmann::json best = nlohmann::json::array();
    for (std::size_t c = 0; c < table.columns.size(); ++c) {
      const auto& col = table.columns[c];
      if (c == 0) {
        obj[col] = table.rows[r][c];
      } else if (col == "seed") {
        obj[col] = std::stoull(table.rows[r][c]);
      } else {
        obj[col] = *to_number(table.rows[r][c]);
      }
      if (flags[r][c]) best.push_back(col);
    }
    obj["best"] = std::move(best);
    rows.push_back(std::move(obj));
  }
  return rows.dump(2);
}

}  // namespace splitlab::cli
