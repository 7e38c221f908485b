#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitlab/protocols/experiment.hpp"

namespace splitlab::cli {

/// A results file whose columns differ from the expected schema.
class SchemaError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Result columns in file order.
const std::vector<std::string>& csv_columns();
std::string csv_header();
std::string csv_row(const proto::MetricsReport& report);

/// Appends rows, writing the header first when the file is new or empty.
/// Throws SchemaError if an existing file has a different header.
void append_results(const std::filesystem::path& path,
                    std::span<const proto::MetricsReport> reports);

struct ResultTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a results file. Throws SchemaError on a header or row-width mismatch.
ResultTable read_results(const std::filesystem::path& path);

/// Whether each cell holds the best value of its column. Quality metrics are
/// maximised and costs minimised; every tied cell is flagged.
std::vector<std::vector<bool>> best_flags(const ResultTable& table);

/// Fixed-width console table; best cells carry a trailing '*'.
std::string render_table(const ResultTable& table);

/// JSON array of row objects with numeric values and a `best` list per row.
std::string render_json(const ResultTable& table);

}  // namespace splitlab::cli
