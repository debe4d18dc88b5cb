#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "exportscore/csv.hpp"

namespace exportscore::dataset {

// ---------------------------------------------------------------------------
// Schema & panel
// ---------------------------------------------------------------------------

enum class ColumnRole {
  numeric,      // numeric predictor
  flag,         // 0/1 predictor
  categorical,  // string-coded (region, industry); grouping + fixed effects
  auxiliary,    // numeric, kept out of the model matrix (e.g. incorporation_year)
};

struct ColumnDecl {
  std::string name;
  ColumnRole role = ColumnRole::numeric;
};

struct PanelSchema {
  std::vector<ColumnDecl> columns;  // everything except the fixed key/outcome columns
  bool expect_export_revenue = true;
  bool expect_total_revenue = true;

  const ColumnDecl* find(const std::string& name) const;
};

// Canonical column set for the financial-accounts layout. `with_derived`
// additionally declares the columns appended by derive_predictors (the layout
// a generated panel is written with).
PanelSchema financial_schema(bool with_derived);

// Names appended by derive_predictors, in order.
const std::vector<std::string>& derived_predictor_names();

struct NumericColumn {
  std::string name;
  ColumnRole role = ColumnRole::numeric;
  std::vector<double> values;      // NaN where missing
  std::vector<std::uint8_t> missing;
};

struct CategoricalColumn {
  std::string name;
  std::vector<std::string> values;  // empty string = missing
};

struct FirmPanel {
  std::vector<std::string> firm_ids;
  std::vector<int> years;
  std::vector<NumericColumn> numeric;
  std::vector<CategoricalColumn> categorical;

  bool has_export_revenue = false;
  std::vector<double> export_revenue;
  std::vector<std::uint8_t> export_revenue_missing;
  bool has_total_revenue = false;
  std::vector<double> total_revenue;
  std::vector<std::uint8_t> total_revenue_missing;

  std::size_t n_rows() const { return firm_ids.size(); }
  int find_numeric(const std::string& name) const;
  int find_categorical(const std::string& name) const;
  std::vector<int> predictor_columns() const;  // numeric + flag roles, declared order

  // rows of each firm ordered by year
  std::map<std::string, std::vector<std::size_t>> rows_by_firm() const;
};

// Numeric predictor matrix over a row subset; what the models consume.
struct DataView {
  const FirmPanel* panel = nullptr;
  std::vector<std::size_t> rows;  // panel row indices
  std::vector<int> cols;          // indices into panel->numeric

  std::size_t n_rows() const { return rows.size(); }
  std::size_t n_cols() const { return cols.size(); }
  double value(std::size_t i, std::size_t j) const {
    return panel->numeric[cols[j]].values[rows[i]];
  }
  bool missing(std::size_t i, std::size_t j) const {
    return panel->numeric[cols[j]].missing[rows[i]] != 0;
  }
  bool row_complete(std::size_t i) const;
  const std::string& col_name(std::size_t j) const { return panel->numeric[cols[j]].name; }
  std::vector<std::string> col_names() const;
};

DataView make_view(const FirmPanel& panel);
DataView make_view(const FirmPanel& panel, std::vector<std::size_t> rows);

// ---------------------------------------------------------------------------
// Labels, exporting patterns, partitions
// ---------------------------------------------------------------------------

struct LabelDefinition {
  enum class Kind { positive_revenue, share_threshold, annual };
  Kind kind = Kind::positive_revenue;
  double percentile = 0.0;  // share_threshold: p in (0,100)
  int year = 0;             // annual: labels restricted to this year

  std::string describe() const;
};

struct LabelSet {
  LabelDefinition definition;
  std::vector<std::int8_t> labels;  // per panel row; -1 = excluded
  std::size_t n_defined = 0;
  std::size_t n_positive = 0;
};

enum class PatternCategory {
  constant_exporter,
  non_exporter,
  switching_exporter,
  switching_non_exporter,
  discontinuous,
};
const char* to_string(PatternCategory c);

enum class BmClass { permanent, temporary, never };
const char* to_string(BmClass c);

struct PatternClass {
  std::string firm_id;
  PatternCategory category = PatternCategory::non_exporter;
  int start_year = 0;            // switching_exporter: first exporting year
  int stop_year = 0;             // switching_non_exporter: first non-exporting year
  int export_year_count = 0;
  BmClass bm_class = BmClass::never;
};

struct Partition {
  std::vector<std::string> train_firm_ids;
  std::vector<std::string> test_firm_ids;
  double fraction = 0.8;
  std::uint64_t seed = 0;

  bool is_train(const std::string& firm) const;
  std::vector<std::size_t> train_rows(const FirmPanel& panel) const;
  std::vector<std::size_t> test_rows(const FirmPanel& panel) const;
};

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

FirmPanel ingest_csv(const std::string& path, const PanelSchema& schema);
FirmPanel ingest_table(const csv::Table& table, const PanelSchema& schema);

// Writes key columns, predictors in panel order, then outcome columns.
// Missing cells become empty fields; re-ingesting reproduces values and mask
// bit-exactly.
void write_csv(const FirmPanel& panel, const std::string& path,
               const std::vector<std::string>& comment_lines = {});
csv::Table to_table(const FirmPanel& panel);

// Appends the derived predictor columns (ratios, indices, spillover shares).
// A derived cell is missing whenever an input is missing or a denominator is
// zero; that is data, not an error.
FirmPanel derive_predictors(const FirmPanel& panel);

LabelSet label(const FirmPanel& panel, const LabelDefinition& def);

// Requires labels for every observed firm-year and per-firm contiguous years.
std::vector<PatternClass> classify_patterns(const FirmPanel& panel, const LabelSet& labels);

Partition make_partition(const FirmPanel& panel, double fraction, std::uint64_t seed);

// Restrict a panel to one calendar year (per-year training protocol).
FirmPanel filter_year(const FirmPanel& panel, int year);

}  // namespace exportscore::dataset
