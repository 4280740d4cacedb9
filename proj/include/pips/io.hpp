#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pips/emulator.hpp"
#include "pips/mcmc.hpp"
#include "pips/rdvs.hpp"
#include "pips/scenarios.hpp"
#include "pips/screening.hpp"

namespace pips::io {

// Shortest text that round-trips a double.
std::string format_double(double v);

std::string read_text(const std::string& path);
// Writes through a temporary file in the same directory and renames it.
void write_text(const std::string& path, const std::string& text);

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;  // throws IoError if absent
  bool has_column(const std::string& name) const;
};

Table parse_csv(const std::string& text, const std::string& what);
std::string format_csv(const Table& table);
Table read_csv(const std::string& path);
void write_csv(const std::string& path, const Table& table);

// Numbered column names: prefix_1 .. prefix_count.
std::vector<std::string> numbered(const std::string& prefix, std::size_t count);

// Field data as stored on disk, before any scaling.
struct FieldTable {
  std::vector<std::string> input_names;
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  std::optional<Eigen::VectorXd> f;  // model output at each row, if provided
};

struct DatasetMeta {
  std::string scenario_id;
  std::uint64_t seed = 0;
  std::vector<std::size_t> truth;  // 0-based
  std::vector<double> true_theta;
  std::vector<double> model_theta;
};

// Columns x_1..x_p, y, then <stem>.json as the sidecar.
void write_dataset(const Dataset& data, const std::string& csv_path, const std::string& json_path);
// Inputs are every column other than y and f, in file order.
FieldTable read_field_table(const std::string& csv_path);
std::string dataset_meta_to_json(const DatasetMeta& meta);
DatasetMeta dataset_meta_from_json(const std::string& text);
DatasetMeta read_dataset_meta(const std::string& json_path);

Table chain_table(const Chain& chain);
void write_chain(const std::string& path, const Chain& chain);
Chain read_chain(const std::string& path);

std::string screening_to_json(const ScreeningResult& result);
ScreeningResult screening_from_json(const std::string& text);
// name, pip, active_flag: one row per input.
std::string screening_summary_csv(const ScreeningResult& result, const std::vector<std::string>& names);

std::string rdvs_reference_csv(const RdvsResult& result);
std::string rdvs_to_json(const RdvsResult& result, const std::vector<std::string>& names);
RdvsResult rdvs_from_json(const std::string& text);

// Columns x_1..x_p, theta_1..theta_k, f.
EmulatorDesign read_emulator_design(const std::string& path);
void write_emulator_design(const std::string& path, const EmulatorDesign& design);

}  // namespace pips::io
