#include "exportscore/panel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <unordered_map>
#include <unordered_set>

#include "exportscore/common.hpp"

namespace exportscore::dataset {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

const ColumnDecl* PanelSchema::find(const std::string& name) const {
  for (const auto& c : columns)
    if (c.name == name) return &c;
  return nullptr;
}

const std::vector<std::string>& derived_predictor_names() {
  static const std::vector<std::string> names = {
      "age",
      "productive_capacity",
      "capital_intensity",
      "labour_productivity",
      "icr",
      "financial_constraints",
      "roa",
      "financial_sustainability",
      "size_age",
      "capital_adequacy",
      "liquidity_ratio",
      "liquidity_returns",
      "regional_spillovers",
      "industrial_spillovers",
      "external_scale",
      "size",
      "average_wage_bill",
  };
  return names;
}

PanelSchema financial_schema(bool with_derived) {
  PanelSchema s;
  auto num = [&](const char* n) { s.columns.push_back({n, ColumnRole::numeric}); };
  auto flag = [&](const char* n) { s.columns.push_back({n, ColumnRole::flag}); };
  // balance-sheet and P&L accounts
  for (const char* n :
       {"fixed_assets", "depreciation", "value_added", "number_of_employees", "ebit", "ebitda",
        "interest_expenses", "interest_paid", "cash_flow", "total_assets", "shareholders_funds",
        "short_term_debt", "long_term_debt", "current_assets", "stocks", "current_liabilities",
        "costs_of_employees", "financial_expenses", "operating_revenue", "material_costs",
        "creditors", "debtors", "taxation", "financial_revenues", "working_capital", "sales",
        "intangible_fixed_assets", "cash"})
    num(n);
  num("tfp");
  num("markup");
  for (const char* n :
       {"corporate_control", "patents", "consolidated_accounts", "inward_fdi", "outward_fdi"})
    flag(n);
  s.columns.push_back({"incorporation_year", ColumnRole::auxiliary});
  s.columns.push_back({"region", ColumnRole::categorical});
  s.columns.push_back({"industry", ColumnRole::categorical});
  if (with_derived) {
    for (const auto& n : derived_predictor_names())
      s.columns.push_back({n, ColumnRole::numeric});
  }
  return s;
}

int FirmPanel::find_numeric(const std::string& name) const {
  for (std::size_t i = 0; i < numeric.size(); ++i)
    if (numeric[i].name == name) return static_cast<int>(i);
  return -1;
}

int FirmPanel::find_categorical(const std::string& name) const {
  for (std::size_t i = 0; i < categorical.size(); ++i)
    if (categorical[i].name == name) return static_cast<int>(i);
  return -1;
}

std::vector<int> FirmPanel::predictor_columns() const {
  std::vector<int> cols;
  for (std::size_t i = 0; i < numeric.size(); ++i) {
    if (numeric[i].role == ColumnRole::numeric || numeric[i].role == ColumnRole::flag)
      cols.push_back(static_cast<int>(i));
  }
  return cols;
}

std::map<std::string, std::vector<std::size_t>> FirmPanel::rows_by_firm() const {
  std::map<std::string, std::vector<std::size_t>> by_firm;
  for (std::size_t i = 0; i < n_rows(); ++i) by_firm[firm_ids[i]].push_back(i);
  for (auto& [firm, rows] : by_firm) {
    std::sort(rows.begin(), rows.end(),
              [&](std::size_t a, std::size_t b) { return years[a] < years[b]; });
  }
  return by_firm;
}

bool DataView::row_complete(std::size_t i) const {
  for (std::size_t j = 0; j < cols.size(); ++j)
    if (missing(i, j)) return false;
  return true;
}

std::vector<std::string> DataView::col_names() const {
  std::vector<std::string> names;
  names.reserve(cols.size());
  for (int c : cols) names.push_back(panel->numeric[c].name);
  return names;
}

DataView make_view(const FirmPanel& panel) {
  std::vector<std::size_t> rows(panel.n_rows());
  for (std::size_t i = 0; i < rows.size(); ++i) rows[i] = i;
  return make_view(panel, std::move(rows));
}

DataView make_view(const FirmPanel& panel, std::vector<std::size_t> rows) {
  DataView v;
  v.panel = &panel;
  v.rows = std::move(rows);
  v.cols = panel.predictor_columns();
  return v;
}

// ---------------------------------------------------------------------------
// Ingestion
// ---------------------------------------------------------------------------

FirmPanel ingest_table(const csv::Table& table, const PanelSchema& schema) {
  // header must match the declared names exactly (both directions)
  std::unordered_set<std::string> expected = {"firm_id", "year"};
  for (const auto& c : schema.columns) expected.insert(c.name);
  if (schema.expect_export_revenue) expected.insert("export_revenue");
  if (schema.expect_total_revenue) expected.insert("total_revenue");

  std::unordered_set<std::string> seen;
  for (const auto& h : table.header) {
    if (!expected.count(h)) fail(ErrorKind::schema, "unknown column \"" + h + "\"");
    if (!seen.insert(h).second) fail(ErrorKind::schema, "duplicate column \"" + h + "\"");
  }
  for (const auto& name : expected) {
    if (!seen.count(name)) fail(ErrorKind::schema, "missing column \"" + name + "\"");
  }

  const std::size_t n = table.nrows();
  FirmPanel p;
  p.firm_ids.resize(n);
  p.years.resize(n);
  for (const auto& c : schema.columns) {
    if (c.role == ColumnRole::categorical) {
      p.categorical.push_back({c.name, std::vector<std::string>(n)});
    } else {
      NumericColumn col;
      col.name = c.name;
      col.role = c.role;
      col.values.assign(n, kNaN);
      col.missing.assign(n, 1);
      p.numeric.push_back(std::move(col));
    }
  }
  p.has_export_revenue = schema.expect_export_revenue;
  p.has_total_revenue = schema.expect_total_revenue;
  if (p.has_export_revenue) {
    p.export_revenue.assign(n, kNaN);
    p.export_revenue_missing.assign(n, 1);
  }
  if (p.has_total_revenue) {
    p.total_revenue.assign(n, kNaN);
    p.total_revenue_missing.assign(n, 1);
  }

  const int firm_col = table.find("firm_id");
  const int year_col = table.find("year");
  const int export_col = table.find("export_revenue");
  const int total_col = table.find("total_revenue");

  // map header position -> panel column
  struct Target {
    enum Kind { skip, numeric, categorical } kind = skip;
    int index = -1;
    bool is_flag = false;
  };
  std::vector<Target> targets(table.ncols());
  for (std::size_t h = 0; h < table.ncols(); ++h) {
    const std::string& name = table.header[h];
    int ni = p.find_numeric(name);
    if (ni >= 0) {
      targets[h] = {Target::numeric, ni, p.numeric[ni].role == ColumnRole::flag};
      continue;
    }
    int ci = p.find_categorical(name);
    if (ci >= 0) targets[h] = {Target::categorical, ci, false};
  }

  auto parse_cell = [](const std::string& cell, const std::string& col, std::size_t row,
                       bool is_flag) -> std::optional<double> {
    if (csv::is_missing_token(cell)) return std::nullopt;
    auto v = csv::parse_double(cell);
    if (!v) {
      fail(ErrorKind::parse, "row " + std::to_string(row + 1) + ": non-numeric value \"" + cell +
                                 "\" in column \"" + col + "\"");
    }
    if (is_flag && *v != 0.0 && *v != 1.0) {
      fail(ErrorKind::parse, "row " + std::to_string(row + 1) + ": flag column \"" + col +
                                 "\" must be 0 or 1, got \"" + cell + "\"");
    }
    return v;
  };

  std::set<std::pair<std::string, int>> keys;
  for (std::size_t r = 0; r < n; ++r) {
    const auto& row = table.rows[r];
    p.firm_ids[r] = row[firm_col];
    if (p.firm_ids[r].empty())
      fail(ErrorKind::parse, "row " + std::to_string(r + 1) + ": empty firm_id");
    auto y = csv::parse_int(row[year_col]);
    if (!y) {
      fail(ErrorKind::parse,
           "row " + std::to_string(r + 1) + ": bad year \"" + row[year_col] + "\"");
    }
    p.years[r] = static_cast<int>(*y);
    if (!keys.emplace(p.firm_ids[r], p.years[r]).second) {
      fail(ErrorKind::duplicate_key, "duplicate (firm_id, year) = (" + p.firm_ids[r] + ", " +
                                         std::to_string(p.years[r]) + ")");
    }
    for (std::size_t h = 0; h < table.ncols(); ++h) {
      const Target& t = targets[h];
      if (t.kind == Target::numeric) {
        if (auto v = parse_cell(row[h], table.header[h], r, t.is_flag)) {
          p.numeric[t.index].values[r] = *v;
          p.numeric[t.index].missing[r] = 0;
        }
      } else if (t.kind == Target::categorical) {
        p.categorical[t.index].values[r] = row[h] == "NA" ? std::string() : row[h];
      }
    }
    if (export_col >= 0 && p.has_export_revenue) {
      if (auto v = parse_cell(row[export_col], "export_revenue", r, false)) {
        p.export_revenue[r] = *v;
        p.export_revenue_missing[r] = 0;
      }
    }
    if (total_col >= 0 && p.has_total_revenue) {
      if (auto v = parse_cell(row[total_col], "total_revenue", r, false)) {
        p.total_revenue[r] = *v;
        p.total_revenue_missing[r] = 0;
      }
    }
  }

  // panel years must form a contiguous range
  std::set<int> year_set(p.years.begin(), p.years.end());
  if (!year_set.empty()) {
    int span = *year_set.rbegin() - *year_set.begin() + 1;
    if (span != static_cast<int>(year_set.size()))
      fail(ErrorKind::schema, "panel years do not form a contiguous range");
  }
  return p;
}

FirmPanel ingest_csv(const std::string& path, const PanelSchema& schema) {
  return ingest_table(csv::read_file(path), schema);
}

csv::Table to_table(const FirmPanel& panel) {
  csv::Table t;
  t.header = {"firm_id", "year"};
  for (const auto& c : panel.numeric) t.header.push_back(c.name);
  for (const auto& c : panel.categorical) t.header.push_back(c.name);
  if (panel.has_export_revenue) t.header.push_back("export_revenue");
  if (panel.has_total_revenue) t.header.push_back("total_revenue");

  t.rows.reserve(panel.n_rows());
  for (std::size_t r = 0; r < panel.n_rows(); ++r) {
    std::vector<std::string> row;
    row.reserve(t.header.size());
    row.push_back(panel.firm_ids[r]);
    row.push_back(std::to_string(panel.years[r]));
    for (const auto& c : panel.numeric)
      row.push_back(c.missing[r] ? std::string() : csv::format_double(c.values[r]));
    for (const auto& c : panel.categorical) row.push_back(c.values[r]);
    if (panel.has_export_revenue) {
      row.push_back(panel.export_revenue_missing[r] ? std::string()
                                                    : csv::format_double(panel.export_revenue[r]));
    }
    if (panel.has_total_revenue) {
      row.push_back(panel.total_revenue_missing[r] ? std::string()
                                                   : csv::format_double(panel.total_revenue[r]));
    }
    t.rows.push_back(std::move(row));
  }
  return t;
}

void write_csv(const FirmPanel& panel, const std::string& path,
               const std::vector<std::string>& comment_lines) {
  csv::write_file(path, comment_lines, to_table(panel));
}

// ---------------------------------------------------------------------------
// Derived predictors
// ---------------------------------------------------------------------------

namespace {

struct CellRef {
  const NumericColumn* col;
  double get(std::size_t r, bool& miss) const {
    if (col->missing[r]) {
      miss = true;
      return 0.0;
    }
    return col->values[r];
  }
};

}  // namespace

FirmPanel derive_predictors(const FirmPanel& panel) {
  const char* required_numeric[] = {
      "fixed_assets",     "depreciation",      "value_added",
      "number_of_employees", "ebit",           "ebitda",
      "interest_expenses", "interest_paid",    "cash_flow",
      "total_assets",     "shareholders_funds", "short_term_debt",
      "long_term_debt",   "current_assets",    "stocks",
      "current_liabilities", "costs_of_employees", "financial_expenses",
      "operating_revenue", "incorporation_year"};
  for (const char* name : required_numeric) {
    if (panel.find_numeric(name) < 0)
      fail(ErrorKind::schema, std::string("missing required base column \"") + name + "\"");
  }
  for (const char* name : {"region", "industry"}) {
    if (panel.find_categorical(name) < 0)
      fail(ErrorKind::schema, std::string("missing required base column \"") + name + "\"");
  }
  if (!panel.has_export_revenue)
    fail(ErrorKind::schema, "missing required base column \"export_revenue\"");
  for (const auto& name : derived_predictor_names()) {
    if (panel.find_numeric(name) >= 0)
      fail(ErrorKind::schema, "derived column \"" + name + "\" already present");
  }

  FirmPanel out = panel;
  const std::size_t n = panel.n_rows();

  auto col = [&](const char* name) -> const NumericColumn& {
    return panel.numeric[panel.find_numeric(name)];
  };
  auto add = [&](const std::string& name) -> NumericColumn& {
    NumericColumn c;
    c.name = name;
    c.role = ColumnRole::numeric;
    c.values.assign(n, kNaN);
    c.missing.assign(n, 1);
    out.numeric.push_back(std::move(c));
    return out.numeric.back();
  };
  auto set = [&](NumericColumn& c, std::size_t r, double v) {
    c.values[r] = v;
    c.missing[r] = 0;
  };

  const auto& fixed_assets = col("fixed_assets");
  const auto& depreciation = col("depreciation");
  const auto& value_added = col("value_added");
  const auto& employees = col("number_of_employees");
  const auto& ebit = col("ebit");
  const auto& ebitda = col("ebitda");
  const auto& interest_expenses = col("interest_expenses");
  const auto& interest_paid = col("interest_paid");
  const auto& cash_flow = col("cash_flow");
  const auto& total_assets = col("total_assets");
  const auto& shareholders = col("shareholders_funds");
  const auto& st_debt = col("short_term_debt");
  const auto& lt_debt = col("long_term_debt");
  const auto& current_assets = col("current_assets");
  const auto& stocks = col("stocks");
  const auto& current_liabilities = col("current_liabilities");
  const auto& wage_costs = col("costs_of_employees");
  const auto& fin_expenses = col("financial_expenses");
  const auto& op_revenue = col("operating_revenue");
  const auto& inc_year = col("incorporation_year");

  auto observed = [](const NumericColumn& c, std::size_t r) { return c.missing[r] == 0; };

  NumericColumn& age = add("age");
  NumericColumn& productive_capacity = add("productive_capacity");
  NumericColumn& capital_intensity = add("capital_intensity");
  NumericColumn& labour_productivity = add("labour_productivity");
  NumericColumn& icr = add("icr");
  NumericColumn& fin_constraints = add("financial_constraints");
  NumericColumn& roa = add("roa");
  NumericColumn& fin_sustainability = add("financial_sustainability");
  NumericColumn& size_age = add("size_age");
  NumericColumn& capital_adequacy = add("capital_adequacy");
  NumericColumn& liquidity_ratio = add("liquidity_ratio");
  NumericColumn& liquidity_returns = add("liquidity_returns");
  NumericColumn& regional_spill = add("regional_spillovers");
  NumericColumn& industrial_spill = add("industrial_spillovers");
  NumericColumn& external_scale = add("external_scale");
  NumericColumn& size = add("size");
  NumericColumn& wage_bill = add("average_wage_bill");

  // (firm, year) -> row, for the lagged productive-capacity inputs
  std::unordered_map<std::string, std::unordered_map<int, std::size_t>> row_of;
  for (std::size_t r = 0; r < n; ++r) row_of[panel.firm_ids[r]][panel.years[r]] = r;

  auto ratio = [&](NumericColumn& dst, std::size_t r, const NumericColumn& num,
                   const NumericColumn& den) {
    if (observed(num, r) && observed(den, r) && den.values[r] != 0.0)
      set(dst, r, num.values[r] / den.values[r]);
  };

  for (std::size_t r = 0; r < n; ++r) {
    if (observed(inc_year, r)) {
      double a = panel.years[r] - inc_year.values[r];
      set(age, r, a < 0 ? 0.0 : a);
    }

    auto prev_firm = row_of.find(panel.firm_ids[r]);
    if (prev_firm != row_of.end()) {
      auto prev = prev_firm->second.find(panel.years[r] - 1);
      if (prev != prev_firm->second.end()) {
        std::size_t q = prev->second;
        if (observed(fixed_assets, r) && observed(fixed_assets, q) && observed(depreciation, q)) {
          double den = fixed_assets.values[q] + depreciation.values[q];
          if (den != 0.0) set(productive_capacity, r, fixed_assets.values[r] / den);
        }
      }
    }

    ratio(capital_intensity, r, fixed_assets, employees);
    ratio(labour_productivity, r, value_added, employees);
    ratio(icr, r, ebit, interest_expenses);
    ratio(fin_constraints, r, interest_paid, cash_flow);
    ratio(roa, r, ebitda, total_assets);
    ratio(fin_sustainability, r, fin_expenses, op_revenue);
    ratio(liquidity_returns, r, cash_flow, total_assets);

    if (observed(total_assets, r) && total_assets.values[r] > 0.0 && !age.missing[r]) {
      double lta = std::log(total_assets.values[r]);
      set(size_age, r, -0.737 * lta + 0.043 * lta * lta - 0.040 * age.values[r]);
    }

    if (observed(shareholders, r) && observed(st_debt, r) && observed(lt_debt, r)) {
      double den = st_debt.values[r] + lt_debt.values[r];
      if (den != 0.0) set(capital_adequacy, r, shareholders.values[r] / den);
    }

    if (observed(current_assets, r) && observed(stocks, r) && observed(current_liabilities, r) &&
        current_liabilities.values[r] != 0.0) {
      set(liquidity_ratio, r,
          (current_assets.values[r] - stocks.values[r]) / current_liabilities.values[r]);
    }

    if (observed(employees, r) && employees.values[r] > 0.0)
      set(size, r, std::log(employees.values[r]));

    if (observed(wage_costs, r) && observed(employees, r) && employees.values[r] != 0.0) {
      double w = wage_costs.values[r] / employees.values[r];
      if (w > 0.0) set(wage_bill, r, std::log(w));
    }
  }

  // exporter shares per region-year, industry-year, and region x industry-year
  const auto& region = panel.categorical[panel.find_categorical("region")];
  const auto& industry = panel.categorical[panel.find_categorical("industry")];
  struct Counts {
    long exporters = 0;
    long total = 0;
  };
  std::map<std::pair<std::string, int>, Counts> by_region, by_industry, by_cell;
  auto cell_key = [&](std::size_t r) { return region.values[r] + "\x1f" + industry.values[r]; };
  for (std::size_t r = 0; r < n; ++r) {
    if (panel.export_revenue_missing[r]) continue;  // status unobserved
    bool exporter = panel.export_revenue[r] > 0.0;
    int y = panel.years[r];
    if (!region.values[r].empty()) {
      auto& c = by_region[{region.values[r], y}];
      ++c.total;
      c.exporters += exporter;
    }
    if (!industry.values[r].empty()) {
      auto& c = by_industry[{industry.values[r], y}];
      ++c.total;
      c.exporters += exporter;
    }
    if (!region.values[r].empty() && !industry.values[r].empty()) {
      auto& c = by_cell[{cell_key(r), y}];
      ++c.total;
      c.exporters += exporter;
    }
  }
  for (std::size_t r = 0; r < n; ++r) {
    int y = panel.years[r];
    if (!region.values[r].empty()) {
      auto it = by_region.find({region.values[r], y});
      if (it != by_region.end() && it->second.total > 0)
        set(regional_spill, r, double(it->second.exporters) / double(it->second.total));
    }
    if (!industry.values[r].empty()) {
      auto it = by_industry.find({industry.values[r], y});
      if (it != by_industry.end() && it->second.total > 0)
        set(industrial_spill, r, double(it->second.exporters) / double(it->second.total));
    }
    if (!region.values[r].empty() && !industry.values[r].empty()) {
      auto it = by_cell.find({cell_key(r), y});
      if (it != by_cell.end() && it->second.total > 0)
        set(external_scale, r, double(it->second.exporters) / double(it->second.total));
    }
  }

  return out;
}

// ---------------------------------------------------------------------------
// Labels
// ---------------------------------------------------------------------------

std::string LabelDefinition::describe() const {
  switch (kind) {
    case Kind::positive_revenue: return "positive-revenue";
    case Kind::share_threshold:
      return "share-threshold(p=" + csv::format_double(percentile, 6) + ")";
    case Kind::annual: return "annual(year=" + std::to_string(year) + ")";
  }
  return "?";
}

LabelSet label(const FirmPanel& panel, const LabelDefinition& def) {
  if (!panel.has_export_revenue) fail(ErrorKind::schema, "panel has no export_revenue column");
  const std::size_t n = panel.n_rows();
  LabelSet out;
  out.definition = def;
  out.labels.assign(n, -1);

  if (def.kind == LabelDefinition::Kind::share_threshold) {
    if (!(def.percentile > 0.0 && def.percentile < 100.0))
      fail(ErrorKind::parameter, "share-threshold percentile must lie in (0, 100)");
    if (!panel.has_total_revenue) fail(ErrorKind::schema, "panel has no total_revenue column");

    std::vector<double> shares(n, kNaN);
    std::vector<double> positive_shares;
    for (std::size_t r = 0; r < n; ++r) {
      if (panel.export_revenue_missing[r] || panel.total_revenue_missing[r]) continue;
      if (panel.total_revenue[r] <= 0.0) continue;
      shares[r] = panel.export_revenue[r] / panel.total_revenue[r];
      if (shares[r] > 0.0) positive_shares.push_back(shares[r]);
    }
    double threshold = std::numeric_limits<double>::infinity();
    if (!positive_shares.empty()) {
      // nearest-rank percentile on the positive-share subsample
      std::sort(positive_shares.begin(), positive_shares.end());
      std::size_t rank = static_cast<std::size_t>(
          std::ceil(def.percentile / 100.0 * double(positive_shares.size())));
      if (rank == 0) rank = 1;
      threshold = positive_shares[rank - 1];
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (std::isnan(shares[r])) continue;
      out.labels[r] = shares[r] > threshold ? 1 : 0;
    }
  } else {
    for (std::size_t r = 0; r < n; ++r) {
      if (panel.export_revenue_missing[r]) continue;
      if (def.kind == LabelDefinition::Kind::annual && panel.years[r] != def.year) continue;
      out.labels[r] = panel.export_revenue[r] > 0.0 ? 1 : 0;
    }
  }

  for (std::size_t r = 0; r < n; ++r) {
    if (out.labels[r] >= 0) {
      ++out.n_defined;
      out.n_positive += out.labels[r];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Exporting patterns
// ---------------------------------------------------------------------------

const char* to_string(PatternCategory c) {
  switch (c) {
    case PatternCategory::constant_exporter: return "constant_exporter";
    case PatternCategory::non_exporter: return "non_exporter";
    case PatternCategory::switching_exporter: return "switching_exporter";
    case PatternCategory::switching_non_exporter: return "switching_non_exporter";
    case PatternCategory::discontinuous: return "discontinuous";
  }
  return "?";
}

const char* to_string(BmClass c) {
  switch (c) {
    case BmClass::permanent: return "permanent";
    case BmClass::temporary: return "temporary";
    case BmClass::never: return "never";
  }
  return "?";
}

std::vector<PatternClass> classify_patterns(const FirmPanel& panel, const LabelSet& labels) {
  if (labels.labels.size() != panel.n_rows())
    fail(ErrorKind::alignment, "label set does not align with panel rows");

  std::vector<PatternClass> out;
  for (const auto& [firm, rows] : panel.rows_by_firm()) {
    std::vector<int> seq;
    seq.reserve(rows.size());
    int prev_year = 0;
    for (std::size_t k = 0; k < rows.size(); ++k) {
      std::size_t r = rows[k];
      if (k > 0 && panel.years[r] != prev_year + 1) {
        fail(ErrorKind::incomplete_timeline,
             "firm " + firm + " has a gap in year coverage at " + std::to_string(panel.years[r]));
      }
      prev_year = panel.years[r];
      if (labels.labels[r] < 0) {
        fail(ErrorKind::incomplete_timeline,
             "firm " + firm + " lacks a label for year " + std::to_string(panel.years[r]));
      }
      seq.push_back(labels.labels[r]);
    }

    PatternClass pc;
    pc.firm_id = firm;
    const int t = static_cast<int>(seq.size());
    int ones = 0, longest_run = 0, run = 0;
    for (int v : seq) {
      ones += v;
      run = v ? run + 1 : 0;
      longest_run = std::max(longest_run, run);
    }
    pc.export_year_count = ones;
    pc.bm_class = ones == 0 ? BmClass::never
                            : (longest_run >= 4 ? BmClass::permanent : BmClass::temporary);

    auto year_at = [&](int k) { return panel.years[rows[k]]; };
    if (ones == t) {
      pc.category = PatternCategory::constant_exporter;
    } else if (ones == 0) {
      pc.category = PatternCategory::non_exporter;
    } else {
      int first_one = -1, first_zero = -1;
      for (int k = 0; k < t; ++k) {
        if (seq[k] == 1 && first_one < 0) first_one = k;
        if (seq[k] == 0 && first_zero < 0) first_zero = k;
      }
      bool zeros_then_ones = first_one > 0 && std::all_of(seq.begin() + first_one, seq.end(),
                                                          [](int v) { return v == 1; });
      bool ones_then_zeros = first_zero > 0 && std::all_of(seq.begin() + first_zero, seq.end(),
                                                           [](int v) { return v == 0; });
      if (zeros_then_ones) {
        pc.category = PatternCategory::switching_exporter;
        pc.start_year = year_at(first_one);
      } else if (ones_then_zeros) {
        pc.category = PatternCategory::switching_non_exporter;
        pc.stop_year = year_at(first_zero);
      } else {
        pc.category = PatternCategory::discontinuous;
      }
    }
    out.push_back(std::move(pc));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Partition
// ---------------------------------------------------------------------------

bool Partition::is_train(const std::string& firm) const {
  return std::binary_search(train_firm_ids.begin(), train_firm_ids.end(), firm);
}

std::vector<std::size_t> Partition::train_rows(const FirmPanel& panel) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < panel.n_rows(); ++r)
    if (is_train(panel.firm_ids[r])) rows.push_back(r);
  return rows;
}

std::vector<std::size_t> Partition::test_rows(const FirmPanel& panel) const {
  std::vector<std::size_t> rows;
  for (std::size_t r = 0; r < panel.n_rows(); ++r)
    if (!is_train(panel.firm_ids[r])) rows.push_back(r);
  return rows;
}

Partition make_partition(const FirmPanel& panel, double fraction, std::uint64_t seed) {
  if (!(fraction > 0.0 && fraction < 1.0))
    fail(ErrorKind::parameter, "partition fraction must lie in (0, 1)");

  std::set<std::string> firm_set(panel.firm_ids.begin(), panel.firm_ids.end());
  std::vector<std::string> firms(firm_set.begin(), firm_set.end());
  Rng rng(derive_seed(seed, "partition"));
  rng.shuffle(firms);

  std::size_t n = firms.size();
  std::size_t n_train = static_cast<std::size_t>(std::llround(fraction * double(n)));
  if (n >= 2) n_train = std::min(std::max<std::size_t>(n_train, 1), n - 1);

  Partition part;
  part.fraction = fraction;
  part.seed = seed;
  part.train_firm_ids.assign(firms.begin(), firms.begin() + n_train);
  part.test_firm_ids.assign(firms.begin() + n_train, firms.end());
  std::sort(part.train_firm_ids.begin(), part.train_firm_ids.end());
  std::sort(part.test_firm_ids.begin(), part.test_firm_ids.end());
  return part;
}

FirmPanel filter_year(const FirmPanel& panel, int year) {
  FirmPanel out;
  out.has_export_revenue = panel.has_export_revenue;
  out.has_total_revenue = panel.has_total_revenue;
  for (const auto& c : panel.numeric) out.numeric.push_back({c.name, c.role, {}, {}});
  for (const auto& c : panel.categorical) out.categorical.push_back({c.name, {}});

  for (std::size_t r = 0; r < panel.n_rows(); ++r) {
    if (panel.years[r] != year) continue;
    out.firm_ids.push_back(panel.firm_ids[r]);
    out.years.push_back(panel.years[r]);
    for (std::size_t c = 0; c < panel.numeric.size(); ++c) {
      out.numeric[c].values.push_back(panel.numeric[c].values[r]);
      out.numeric[c].missing.push_back(panel.numeric[c].missing[r]);
    }
    for (std::size_t c = 0; c < panel.categorical.size(); ++c)
      out.categorical[c].values.push_back(panel.categorical[c].values[r]);
    if (panel.has_export_revenue) {
      out.export_revenue.push_back(panel.export_revenue[r]);
      out.export_revenue_missing.push_back(panel.export_revenue_missing[r]);
    }
    if (panel.has_total_revenue) {
      out.total_revenue.push_back(panel.total_revenue[r]);
      out.total_revenue_missing.push_back(panel.total_revenue_missing[r]);
    }
  }
  return out;
}

}  // namespace exportscore::dataset
