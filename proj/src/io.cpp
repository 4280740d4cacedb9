#include "pips/io.hpp"

#include <cerrno>
#include <charconv>
#include <cstdio>
#include <cstring>
#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "pips/errors.hpp"

namespace pips::io {

namespace {

using Json = nlohmann::json;
namespace fs = std::filesystem;

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\"");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\"");
  return s.substr(b, e - b + 1);
}

double parse_number(const std::string& cell, const std::string& what, std::size_t line) {
  const std::string t = trim(cell);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(t.c_str(), &end);
  if (t.empty() || end != t.c_str() + t.size() || errno == ERANGE) {
    throw IoError(what + ": line " + std::to_string(line) + ": not a number: '" + t + "'");
  }
  return v;
}

Json parse_json(const std::string& text, const std::string& what) {
  try {
    return Json::parse(text);
  } catch (const Json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

template <class F>
auto json_guard(const std::string& what, F&& f) {
  try {
    return f();
  } catch (const Json::exception& e) {
    throw IoError(what + ": " + e.what());
  }
}

void require_kind(const Json& j, const char* kind, const std::string& what) {
  if (!j.is_object() || !j.contains("kind") || j.at("kind") != kind) {
    throw IoError(what + ": expected a document of kind '" + kind + "'");
  }
  if (!j.contains("schema_version") || j.at("schema_version") != 1) {
    throw IoError(what + ": unsupported schema_version");
  }
}

}  // namespace

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path + " for reading");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path);
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path()) {
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + target.parent_path().string() + ": " + ec.message());
  }
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  fs::rename(tmp, target, ec);
  if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path + ": " + ec.message());
}

std::size_t Table::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return c;
  }
  throw IoError("missing column '" + name + "'");
}

bool Table::has_column(const std::string& name) const {
  return std::find(header.begin(), header.end(), name) != header.end();
}

Table parse_csv(const std::string& text, const std::string& what) {
  Table t;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty() || line[0] == '#') continue;
    const auto cells = split(line, ',');
    if (t.header.empty()) {
      for (const auto& c : cells) t.header.push_back(trim(c));
      continue;
    }
    if (cells.size() != t.header.size()) {
      throw IoError(what + ": line " + std::to_string(line_no) + ": expected " +
                    std::to_string(t.header.size()) + " fields, got " + std::to_string(cells.size()));
    }
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) row.push_back(parse_number(c, what, line_no));
    t.rows.push_back(std::move(row));
  }
  if (t.header.empty()) throw IoError(what + ": empty file");
  return t;
}

std::string format_csv(const Table& table) {
  std::string out;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    if (c) out += ',';
    out += table.header[c];
  }
  out += '\n';
  for (const auto& row : table.rows) {
    if (row.size() != table.header.size()) throw IoError("internal: ragged table on write");
    for (std::size_t c = 0; c < row.size(); ++c) {
      if (c) out += ',';
      out += format_double(row[c]);
    }
    out += '\n';
  }
  return out;
}

Table read_csv(const std::string& path) { return parse_csv(read_text(path), path); }

void write_csv(const std::string& path, const Table& table) { write_text(path, format_csv(table)); }

std::vector<std::string> numbered(const std::string& prefix, std::size_t count) {
  std::vector<std::string> out;
  for (std::size_t i = 1; i <= count; ++i) out.push_back(prefix + "_" + std::to_string(i));
  return out;
}

void write_dataset(const Dataset& data, const std::string& csv_path, const std::string& json_path) {
  const auto n = data.design.rows();
  const auto p = static_cast<std::size_t>(data.design.cols());
  if (data.y.size() != n) throw IoError("dataset: y length does not match the design");
  Table t;
  t.header = numbered("x", p);
  t.header.push_back("y");
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<double> row;
    for (std::size_t l = 0; l < p; ++l) row.push_back(data.design(i, static_cast<Eigen::Index>(l)));
    row.push_back(data.y(i));
    t.rows.push_back(std::move(row));
  }
  DatasetMeta meta{data.scenario_id, data.seed, data.truth, data.true_theta, data.model_theta};
  write_csv(csv_path, t);
  write_text(json_path, dataset_meta_to_json(meta));
}

FieldTable read_field_table(const std::string& csv_path) {
  const Table t = read_csv(csv_path);
  FieldTable out;
  const std::size_t y_col = t.column("y");
  std::optional<std::size_t> f_col;
  if (t.has_column("f")) f_col = t.column("f");
  std::vector<std::size_t> x_cols;
  for (std::size_t c = 0; c < t.header.size(); ++c) {
    if (c == y_col || (f_col && c == *f_col)) continue;
    x_cols.push_back(c);
    out.input_names.push_back(t.header[c]);
  }
  if (x_cols.empty()) throw IoError(csv_path + ": no input columns");
  if (t.rows.empty()) throw IoError(csv_path + ": no data rows");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  out.x.resize(n, static_cast<Eigen::Index>(x_cols.size()));
  out.y.resize(n);
  if (f_col) out.f = Eigen::VectorXd(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < x_cols.size(); ++c) out.x(i, static_cast<Eigen::Index>(c)) = row[x_cols[c]];
    out.y(i) = row[y_col];
    if (f_col) (*out.f)(i) = row[*f_col];
  }
  if (!out.x.allFinite() || !out.y.allFinite()) throw IoError(csv_path + ": non-finite values");
  return out;
}

std::string dataset_meta_to_json(const DatasetMeta& meta) {
  Json j;
  j["kind"] = "pips-dataset";
  j["schema_version"] = 1;
  j["scenario_id"] = meta.scenario_id;
  j["seed"] = meta.seed;
  j["truth"] = meta.truth;
  std::vector<std::string> labels;
  for (std::size_t l : meta.truth) labels.push_back("x_" + std::to_string(l + 1));
  j["truth_labels"] = labels;
  j["true_theta"] = meta.true_theta;
  j["model_theta"] = meta.model_theta;
  return j.dump(2) + "\n";
}

DatasetMeta dataset_meta_from_json(const std::string& text) {
  const Json j = parse_json(text, "dataset sidecar");
  require_kind(j, "pips-dataset", "dataset sidecar");
  return json_guard("dataset sidecar", [&] {
    DatasetMeta m;
    m.scenario_id = j.at("scenario_id").get<std::string>();
    m.seed = j.at("seed").get<std::uint64_t>();
    m.truth = j.at("truth").get<std::vector<std::size_t>>();
    m.true_theta = j.at("true_theta").get<std::vector<double>>();
    m.model_theta = j.value("model_theta", std::vector<double>{});
    return m;
  });
}

DatasetMeta read_dataset_meta(const std::string& json_path) {
  return dataset_meta_from_json(read_text(json_path));
}

Table chain_table(const Chain& chain) {
  Table t;
  t.header = numbered("rho", chain.p);
  t.header.push_back("sigma2");
  t.header.push_back("sigma02");
  for (const auto& h : numbered("theta", chain.k)) t.header.push_back(h);
  t.header.push_back("log_post");
  for (const auto& s : chain.samples) {
    if (s.rho.size() != chain.p || s.theta.size() != chain.k) throw IoError("chain: sample size mismatch on write");
    std::vector<double> row(s.rho);
    row.push_back(s.sigma2);
    row.push_back(s.sigma02);
    row.insert(row.end(), s.theta.begin(), s.theta.end());
    row.push_back(s.log_post);
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_chain(const std::string& path, const Chain& chain) { write_csv(path, chain_table(chain)); }

Chain read_chain(const std::string& path) {
  const Table t = read_csv(path);
  Chain c;
  while (t.has_column("rho_" + std::to_string(c.p + 1))) ++c.p;
  while (t.has_column("theta_" + std::to_string(c.k + 1))) ++c.k;
  if (c.p == 0) throw IoError(path + ": no rho columns");
  const std::size_t s2 = t.column("sigma2");
  const std::size_t s02 = t.column("sigma02");
  const std::size_t lp = t.column("log_post");
  for (const auto& row : t.rows) {
    ChainSample s;
    for (std::size_t l = 0; l < c.p; ++l) s.rho.push_back(row[t.column("rho_" + std::to_string(l + 1))]);
    for (std::size_t j = 0; j < c.k; ++j) s.theta.push_back(row[t.column("theta_" + std::to_string(j + 1))]);
    s.sigma2 = row[s2];
    s.sigma02 = row[s02];
    s.log_post = row[lp];
    for (double r : s.rho) {
      if (!(r > 0.0 && r <= 1.0)) throw IoError(path + ": rho outside (0, 1]");
    }
    c.samples.push_back(std::move(s));
  }
  return c;
}

std::string screening_to_json(const ScreeningResult& r) {
  const std::size_t models = std::size_t{1} << r.p;
  if (r.log_bayes_factors.size() != models || r.model_posteriors.size() != models ||
      r.mc_se.size() != models || r.ess.size() != models || r.inclusion_probs.size() != r.p ||
      r.active.size() != r.p) {
    throw IoError("screening result: inconsistent sizes on write");
  }
  Json j;
  j["kind"] = "pips-screening";
  j["schema_version"] = 1;
  j["p"] = r.p;
  j["draws"] = r.draws;
  j["alpha"] = r.alpha;
  j["threshold"] = r.threshold;
  Json lbf = Json::object(), post = Json::object(), se = Json::object(), ess = Json::object();
  for (std::size_t g = 0; g < models; ++g) {
    const std::string key = ModelIndex(static_cast<std::uint32_t>(g)).hex();
    lbf[key] = r.log_bayes_factors[g];
    post[key] = r.model_posteriors[g];
    se[key] = r.mc_se[g];
    ess[key] = r.ess[g];
  }
  j["log_bayes_factors"] = lbf;
  j["model_posteriors"] = post;
  j["mc_se"] = se;
  j["ess"] = ess;
  j["inclusion_probabilities"] = r.inclusion_probs;
  std::vector<int> active;
  for (bool a : r.active) active.push_back(a ? 1 : 0);
  j["active"] = active;
  if (!r.pairwise.empty()) {
    Json pairs = Json::array();
    for (const auto& pi : r.pairwise) pairs.push_back({{"l", pi.l}, {"j", pi.j}, {"probability", pi.probability}});
    j["pairwise"] = pairs;
  }
  j["low_ess_models"] = r.low_ess_models;
  return j.dump(2) + "\n";
}

ScreeningResult screening_from_json(const std::string& text) {
  const Json j = parse_json(text, "screening result");
  require_kind(j, "pips-screening", "screening result");
  return json_guard("screening result", [&] {
    ScreeningResult r;
    r.p = j.at("p").get<std::size_t>();
    check_enumeration_cap(r.p);
    const std::size_t models = std::size_t{1} << r.p;
    r.draws = j.value("draws", std::size_t{0});
    r.alpha = j.at("alpha").get<std::vector<double>>();
    r.threshold = j.at("threshold").get<double>();
    auto keyed = [&](const char* field) {
      std::vector<double> out(models, 0.0);
      std::vector<bool> seen(models, false);
      for (const auto& [key, value] : j.at(field).items()) {
        const std::uint32_t g = ModelIndex::parse_hex(key).bits();
        if (g >= models) throw IoError(std::string("screening result: model key out of range in ") + field);
        out[g] = value.get<double>();
        seen[g] = true;
      }
      for (bool s : seen) {
        if (!s) throw IoError(std::string("screening result: missing models in ") + field);
      }
      return out;
    };
    r.log_bayes_factors = keyed("log_bayes_factors");
    r.model_posteriors = keyed("model_posteriors");
    r.mc_se = keyed("mc_se");
    r.ess = keyed("ess");
    r.inclusion_probs = j.at("inclusion_probabilities").get<std::vector<double>>();
    if (r.inclusion_probs.size() != r.p || r.alpha.size() != r.p) throw IoError("screening result: per-input arrays have the wrong length");
    for (int a : j.at("active").get<std::vector<int>>()) r.active.push_back(a != 0);
    if (r.active.size() != r.p) throw IoError("screening result: active has the wrong length");
    if (j.contains("pairwise")) {
      for (const auto& e : j.at("pairwise")) {
        r.pairwise.push_back({e.at("l").get<std::size_t>(), e.at("j").get<std::size_t>(), e.at("probability").get<double>()});
      }
    }
    r.low_ess_models = j.value("low_ess_models", std::size_t{0});
    return r;
  });
}

std::string screening_summary_csv(const ScreeningResult& result, const std::vector<std::string>& names) {
  if (names.size() != result.p) throw IoError("screening summary: one name per input is required");
  std::string out = "name,pip,active_flag\n";
  for (std::size_t l = 0; l < result.p; ++l) {
    out += names[l] + "," + format_double(result.inclusion_probs[l]) + "," + (result.active[l] ? "1" : "0") + "\n";
  }
  return out;
}

std::string rdvs_reference_csv(const RdvsResult& result) {
  Table t;
  t.header = {"repetition", "reference_median"};
  for (std::size_t r = 0; r < result.reference_medians.size(); ++r) {
    t.rows.push_back({static_cast<double>(r + 1), result.reference_medians[r]});
  }
  return format_csv(t);
}

std::string rdvs_to_json(const RdvsResult& r, const std::vector<std::string>& names) {
  const std::size_t p = r.input_medians.size();
  if (names.size() != p || r.thresholds.size() != r.percentiles.size() || r.active.size() != r.percentiles.size()) {
    throw IoError("rdvs result: inconsistent sizes on write");
  }
  Json j;
  j["kind"] = "pips-rdvs";
  j["schema_version"] = 1;
  j["repetitions"] = r.reference_medians.size();
  j["inputs"] = names;
  j["input_medians"] = r.input_medians;
  j["reference_medians"] = r.reference_medians;
  Json runs = Json::array();
  for (Eigen::Index t = 0; t < r.run_medians.rows(); ++t) {
    std::vector<double> row;
    for (Eigen::Index l = 0; l < r.run_medians.cols(); ++l) row.push_back(r.run_medians(t, l));
    runs.push_back(row);
  }
  j["run_medians"] = runs;
  Json per = Json::array();
  for (std::size_t q = 0; q < r.percentiles.size(); ++q) {
    std::vector<int> flags;
    for (bool a : r.active[q]) flags.push_back(a ? 1 : 0);
    per.push_back({{"percentile", r.percentiles[q]}, {"threshold", r.thresholds[q]}, {"active", flags}});
  }
  j["classifications"] = per;
  return j.dump(2) + "\n";
}

RdvsResult rdvs_from_json(const std::string& text) {
  const Json j = parse_json(text, "rdvs result");
  require_kind(j, "pips-rdvs", "rdvs result");
  return json_guard("rdvs result", [&] {
    const auto runs = j.at("run_medians").get<std::vector<std::vector<double>>>();
    const auto p = j.at("input_medians").get<std::vector<double>>().size();
    Eigen::MatrixXd run_medians(static_cast<Eigen::Index>(runs.size()), static_cast<Eigen::Index>(p));
    for (std::size_t t = 0; t < runs.size(); ++t) {
      if (runs[t].size() != p) throw IoError("rdvs result: ragged run_medians");
      for (std::size_t l = 0; l < p; ++l) run_medians(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(l)) = runs[t][l];
    }
    std::vector<double> percentiles;
    for (const auto& c : j.at("classifications")) percentiles.push_back(c.at("percentile").get<double>());
    return rdvs_classify(j.at("reference_medians").get<std::vector<double>>(), std::move(run_medians), percentiles);
  });
}

EmulatorDesign read_emulator_design(const std::string& path) {
  const Table t = read_csv(path);
  EmulatorDesign d;
  while (t.has_column("x_" + std::to_string(d.p + 1))) ++d.p;
  while (t.has_column("theta_" + std::to_string(d.k + 1))) ++d.k;
  const std::size_t f_col = t.column("f");
  if (d.p == 0) throw IoError(path + ": no x_ columns");
  const auto n = static_cast<Eigen::Index>(t.rows.size());
  d.inputs.resize(n, static_cast<Eigen::Index>(d.p + d.k));
  d.outputs.resize(n);
  std::vector<std::size_t> cols;
  for (const auto& h : numbered("x", d.p)) cols.push_back(t.column(h));
  for (const auto& h : numbered("theta", d.k)) cols.push_back(t.column(h));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = t.rows[static_cast<std::size_t>(i)];
    for (std::size_t c = 0; c < cols.size(); ++c) d.inputs(i, static_cast<Eigen::Index>(c)) = row[cols[c]];
    d.outputs(i) = row[f_col];
  }
  try {
    d.validate();
  } catch (const ConfigError& e) {
    throw IoError(path + ": " + e.what());
  }
  return d;
}

void write_emulator_design(const std::string& path, const EmulatorDesign& design) {
  Table t;
  t.header = numbered("x", design.p);
  for (const auto& h : numbered("theta", design.k)) t.header.push_back(h);
  t.header.push_back("f");
  for (Eigen::Index i = 0; i < design.inputs.rows(); ++i) {
    std::vector<double> row;
    for (Eigen::Index c = 0; c < design.inputs.cols(); ++c) row.push_back(design.inputs(i, c));
    row.push_back(design.outputs(i));
    t.rows.push_back(std::move(row));
  }
  write_csv(path, t);
}

}  // namespace pips::io
