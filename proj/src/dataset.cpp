#include "ctximp/dataset.hpp"

#include <array>
#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include <fmt/format.h>

#include "ctximp/errors.hpp"

namespace ctximp {

std::string_view to_string(ColumnKind kind) {
  return kind == ColumnKind::categorical ? "categorical" : "numeric";
}

std::string Column::cell_text(std::size_t row) const {
  if (kind == ColumnKind::categorical) return labels.at(codes.at(row));
  return fmt::format("{:.17g}", values.at(row));
}

Column make_categorical(std::string name, std::span<const std::string> cells,
                        const std::optional<std::vector<std::string>>& declared_labels) {
  Column column;
  column.name = std::move(name);
  column.kind = ColumnKind::categorical;
  std::unordered_map<std::string, std::uint32_t> lookup;
  if (declared_labels) {
    for (const auto& label : *declared_labels) {
      if (!lookup.emplace(label, static_cast<std::uint32_t>(column.labels.size())).second) {
        throw DataError(fmt::format("column '{}': duplicate declared label '{}'", column.name, label));
      }
      column.labels.push_back(label);
    }
  }
  column.codes.reserve(cells.size());
  for (const auto& cell : cells) {
    auto it = lookup.find(cell);
    if (it == lookup.end()) {
      if (declared_labels) {
        throw DataError(fmt::format("column '{}': unknown label '{}'", column.name, cell));
      }
      it = lookup.emplace(cell, static_cast<std::uint32_t>(column.labels.size())).first;
      column.labels.push_back(cell);
    }
    column.codes.push_back(it->second);
  }
  return column;
}

Column make_categorical(std::string name, std::vector<std::uint32_t> codes,
                        std::vector<std::string> labels) {
  Column column;
  column.name = std::move(name);
  column.kind = ColumnKind::categorical;
  column.codes = std::move(codes);
  column.labels = std::move(labels);
  return column;
}

Column make_numeric(std::string name, std::vector<double> values) {
  Column column;
  column.name = std::move(name);
  column.kind = ColumnKind::numeric;
  column.values = std::move(values);
  return column;
}

// ---------------------------------------------------------------------------
// Table

Table::Table(std::vector<Column> columns) : columns_(std::move(columns)) {
  if (columns_.empty()) throw DataError("table has no columns");
  n_rows_ = columns_.front().size();
  std::unordered_set<std::string> names;
  for (const auto& column : columns_) {
    if (column.name.empty()) throw DataError("empty column name");
    if (!names.insert(column.name).second) {
      throw DataError(fmt::format("duplicate column name '{}'", column.name));
    }
    if (column.size() != n_rows_) {
      throw DataError(fmt::format("column '{}' has {} entries, expected {}", column.name,
                                  column.size(), n_rows_));
    }
    if (column.is_categorical()) {
      if (column.labels.empty()) {
        throw DataError(fmt::format("column '{}' has arity 0", column.name));
      }
      for (const auto code : column.codes) {
        if (code >= column.labels.size()) {
          throw DataError(fmt::format("column '{}': code {} out of range for arity {}",
                                      column.name, code, column.labels.size()));
        }
      }
    }
  }
  if (n_rows_ == 0) throw DataError("table has no rows");
}

std::optional<std::size_t> Table::find(std::string_view name) const {
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (columns_[i].name == name) return i;
  }
  return std::nullopt;
}

std::size_t Table::index_of(std::string_view name) const {
  if (auto index = find(name)) return *index;
  throw DataError(fmt::format("unknown column '{}'", name));
}

// ---------------------------------------------------------------------------
// Dataset

Dataset::Dataset(Table table, std::string_view target, std::optional<std::string_view> context)
    : table_(std::move(table)) {
  target_ = table_.index_of(target);
  if (context) context_ = table_.index_of(*context);
  validate();
}

Dataset::Dataset(Table table, std::size_t target, std::optional<std::size_t> context)
    : table_(std::move(table)), target_(target), context_(context) {
  validate();
}

void Dataset::validate() const {
  if (target_ >= table_.n_columns()) throw DataError("target column index out of range");
  if (context_) {
    if (*context_ >= table_.n_columns()) throw DataError("context column index out of range");
    if (*context_ == target_) throw DataError("target and context must be distinct columns");
    if (!column(*context_).is_categorical()) {
      throw DataError(fmt::format("context column '{}' must be categorical", column(*context_).name));
    }
  }
  for (std::size_t i = 0; i < table_.n_columns(); ++i) {
    if (i != target_ && !column(i).is_categorical()) {
      throw DataError(
          fmt::format("column '{}' is numeric; only the target may be numeric", column(i).name));
    }
  }
}

const Column& Dataset::context_column() const {
  if (!context_) throw DataError("no context column designated");
  return column(*context_);
}

std::size_t Dataset::context_arity() const { return context_column().arity(); }

std::vector<std::size_t> Dataset::input_columns() const {
  std::vector<std::size_t> inputs;
  for (std::size_t i = 0; i < table_.n_columns(); ++i) {
    if (i != target_ && (!context_ || i != *context_)) inputs.push_back(i);
  }
  return inputs;
}

Dataset Dataset::select_rows(std::span<const std::uint32_t> rows) const {
  if (rows.empty()) throw DataError("row selection is empty");
  std::vector<Column> columns;
  columns.reserve(table_.n_columns());
  for (const auto& source : table_.columns()) {
    Column column;
    column.name = source.name;
    column.kind = source.kind;
    column.labels = source.labels;
    if (source.is_categorical()) {
      column.codes.reserve(rows.size());
      for (const auto row : rows) column.codes.push_back(source.codes.at(row));
    } else {
      column.values.reserve(rows.size());
      for (const auto row : rows) column.values.push_back(source.values.at(row));
    }
    columns.push_back(std::move(column));
  }
  return Dataset(Table(std::move(columns)), target_, context_);
}

Dataset Dataset::with_codes(std::size_t index, std::vector<std::uint32_t> codes) const {
  std::vector<Column> columns = table_.columns();
  Column& column = columns.at(index);
  if (!column.is_categorical()) throw DataError("with_codes on a numeric column");
  column.codes = std::move(codes);
  return Dataset(Table(std::move(columns)), target_, context_);
}

std::vector<std::uint32_t> Dataset::rows_in_context(std::uint32_t value) const {
  const auto& codes = context_column().codes;
  std::vector<std::uint32_t> rows;
  for (std::uint32_t i = 0; i < codes.size(); ++i) {
    if (codes[i] == value) rows.push_back(i);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// CSV

std::vector<ColumnSchema> schema_of(const Table& table) {
  std::vector<ColumnSchema> schema;
  for (const auto& column : table.columns()) {
    ColumnSchema entry{column.name, column.kind, std::nullopt};
    if (column.is_categorical()) entry.declared_labels = column.labels;
    schema.push_back(std::move(entry));
  }
  return schema;
}

namespace {

std::vector<std::string> split_line(std::string_view line, std::size_t line_number) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    if (!cell.empty() && cell.front() == '"') {
      throw DataError(fmt::format("line {}: quoted cells are not supported", line_number));
    }
    cells.emplace_back(cell);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return cells;
}

double parse_number(const std::string& cell, std::string_view column, std::size_t line_number) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last) {
    throw DataError(fmt::format("line {}: column '{}': cannot parse '{}' as a number", line_number,
                                column, cell));
  }
  return value;
}

}  // namespace

Table read_table(const std::filesystem::path& path, std::span<const ColumnSchema> schema) {
  std::ifstream in(path);
  if (!in) throw DataError(fmt::format("cannot open '{}'", path.string()));

  std::string line;
  std::size_t line_number = 0;
  if (!std::getline(in, line)) throw DataError(fmt::format("'{}' is empty", path.string()));
  ++line_number;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_line(line, line_number);

  std::vector<ColumnSchema> effective;
  if (schema.empty()) {
    for (const auto& name : header) effective.push_back({name, ColumnKind::categorical, std::nullopt});
  } else {
    if (schema.size() != header.size()) {
      throw DataError(fmt::format("header has {} columns, schema has {}", header.size(), schema.size()));
    }
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] != schema[i].name) {
        throw DataError(fmt::format("header column {} is '{}', schema expects '{}'", i + 1, header[i],
                                    schema[i].name));
      }
    }
    effective.assign(schema.begin(), schema.end());
  }

  std::vector<std::vector<std::string>> cells(header.size());
  while (std::getline(in, line)) {
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto row = split_line(line, line_number);
    if (row.size() != header.size()) {
      throw DataError(fmt::format("line {}: expected {} values, found {}", line_number, header.size(),
                                  row.size()));
    }
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (row[i].empty()) {
        throw DataError(fmt::format("line {}: missing value in column '{}'", line_number, header[i]));
      }
      cells[i].push_back(std::move(row[i]));
    }
  }
  if (cells.front().empty()) throw DataError(fmt::format("'{}' has no data rows", path.string()));

  std::vector<Column> columns;
  for (std::size_t i = 0; i < effective.size(); ++i) {
    const auto& spec = effective[i];
    if (spec.kind == ColumnKind::categorical) {
      columns.push_back(make_categorical(spec.name, cells[i], spec.declared_labels));
    } else {
      std::vector<double> values;
      values.reserve(cells[i].size());
      for (std::size_t r = 0; r < cells[i].size(); ++r) {
        values.push_back(parse_number(cells[i][r], spec.name, r + 2));
      }
      columns.push_back(make_numeric(spec.name, std::move(values)));
    }
  }
  return Table(std::move(columns));
}

Dataset load_csv(const std::filesystem::path& path, std::span<const ColumnSchema> schema,
                 std::string_view target, std::optional<std::string_view> context) {
  for (const auto& entry : schema) {
    if (entry.kind == ColumnKind::numeric && entry.name != target) {
      throw DataError(fmt::format("column '{}' declared numeric; only the target may be numeric",
                                  entry.name));
    }
  }
  return Dataset(read_table(path, schema), target, context);
}

std::string to_csv(const Table& table) {
  std::string out;
  for (std::size_t i = 0; i < table.n_columns(); ++i) {
    const auto& name = table.column(i).name;
    if (name.empty() || name.find_first_of(",\n\r") != std::string::npos) {
      throw DataError(fmt::format("column name '{}' cannot be written as CSV", name));
    }
    if (i) out += ',';
    out += name;
  }
  out += '\n';
  for (const auto& column : table.columns()) {
    for (const auto& label : column.labels) {
      if (label.empty() || label.find_first_of(",\n\r") != std::string::npos ||
          label.front() == '"') {
        throw DataError(fmt::format("column '{}': label '{}' cannot be written as CSV", column.name, label));
      }
    }
  }
  for (std::size_t row = 0; row < table.n_rows(); ++row) {
    for (std::size_t i = 0; i < table.n_columns(); ++i) {
      if (i) out += ',';
      out += table.column(i).cell_text(row);
    }
    out += '\n';
  }
  return out;
}

void save_csv(const Table& table, const std::filesystem::path& path) {
  const auto text = to_csv(table);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(fmt::format("cannot write '{}'", path.string()));
  out << text;
  if (!out) throw DataError(fmt::format("write to '{}' failed", path.string()));
}

// ---------------------------------------------------------------------------
// Generators

namespace {

constexpr std::array<std::array<std::uint8_t, 7>, 10> kSegments = {{
    {1, 1, 1, 0, 1, 1, 1},  // 0
    {0, 0, 1, 0, 0, 1, 0},  // 1
    {1, 0, 1, 1, 1, 0, 1},  // 2
    {1, 0, 1, 1, 0, 1, 1},  // 3
    {0, 1, 1, 1, 0, 1, 0},  // 4
    {1, 1, 0, 1, 0, 1, 1},  // 5
    {1, 1, 0, 1, 1, 1, 1},  // 6
    {1, 0, 1, 0, 0, 1, 0},  // 7
    {1, 1, 1, 1, 1, 1, 1},  // 8
    {1, 1, 1, 1, 0, 1, 1},  // 9
}};

std::vector<std::string> decimal_labels(unsigned arity) {
  std::vector<std::string> labels;
  for (unsigned i = 0; i < arity; ++i) labels.push_back(std::to_string(i));
  return labels;
}

/// Rows are tuples of codes in column order; names[i] gets arity arities[i].
Dataset from_rows(const std::vector<std::string>& names, const std::vector<unsigned>& arities,
                  const std::vector<std::vector<std::uint32_t>>& rows) {
  std::vector<Column> columns;
  for (std::size_t c = 0; c < names.size(); ++c) {
    std::vector<std::uint32_t> codes;
    codes.reserve(rows.size());
    for (const auto& row : rows) codes.push_back(row[c]);
    columns.push_back(make_categorical(names[c], std::move(codes), decimal_labels(arities[c])));
  }
  return Dataset(Table(std::move(columns)), "Y", std::string_view("X_c"));
}

}  // namespace

std::span<const std::uint8_t, 7> seven_segment(unsigned digit) {
  if (digit > 9) throw ConfigError(fmt::format("no seven-segment pattern for {}", digit));
  return std::span<const std::uint8_t, 7>(kSegments[digit]);
}

Dataset generate_example1() {
  std::vector<std::vector<std::uint32_t>> rows;
  for (std::uint32_t xc = 0; xc < 2; ++xc) {
    for (std::uint32_t x1 = 0; x1 < 2; ++x1) {
      for (std::uint32_t x2 = 0; x2 < 2; ++x2) {
        if (x2 == xc) {
          rows.push_back({xc, x1, x2, x1});
          rows.push_back({xc, x1, x2, x1});
        } else {
          rows.push_back({xc, x1, x2, 2});
          rows.push_back({xc, x1, x2, 3});
        }
      }
    }
  }
  return from_rows({"X_c", "X_1", "X_2", "Y"}, {2, 2, 2, 4}, rows);
}

Dataset generate_problem1() {
  std::vector<std::vector<std::uint32_t>> rows;
  for (std::uint32_t xc = 0; xc < 2; ++xc) {
    for (std::uint32_t x1 = 0; x1 < 2; ++x1) {
      for (std::uint32_t x2 = 0; x2 < 2; ++x2) {
        for (std::uint32_t x3 = 0; x3 < 2; ++x3) {
          const std::uint32_t y = x1 == 0 ? 2 : (xc == 0 ? x2 : x3);
          rows.push_back({xc, x1, x2, x3, y});
        }
      }
    }
  }
  return from_rows({"X_c", "X_1", "X_2", "X_3", "Y"}, {2, 2, 2, 2, 3}, rows);
}

Dataset generate_problem2() {
  std::vector<std::vector<std::uint32_t>> rows;
  // Context 0: every segment follows the digit; 8 replicates x X_8.
  for (std::uint32_t y = 0; y < 10; ++y) {
    for (int replicate = 0; replicate < 8; ++replicate) {
      for (std::uint32_t x8 = 0; x8 < 2; ++x8) {
        std::vector<std::uint32_t> row{0};
        for (const auto s : kSegments[y]) row.push_back(s);
        row.push_back(x8);
        row.push_back(y);
        rows.push_back(std::move(row));
      }
    }
  }
  // Context 1: lower-left, lower-right and bottom segments replaced by a full
  // factorial independent of the digit.
  for (std::uint32_t y = 0; y < 10; ++y) {
    for (std::uint32_t noise = 0; noise < 8; ++noise) {
      for (std::uint32_t x8 = 0; x8 < 2; ++x8) {
        std::vector<std::uint32_t> row{1};
        for (int s = 0; s < 4; ++s) row.push_back(kSegments[y][s]);
        row.push_back((noise >> 2) & 1U);
        row.push_back((noise >> 1) & 1U);
        row.push_back(noise & 1U);
        row.push_back(x8);
        row.push_back(y);
        rows.push_back(std::move(row));
      }
    }
  }
  return from_rows({"X_c", "X_1", "X_2", "X_3", "X_4", "X_5", "X_6", "X_7", "X_8", "Y"},
                   {2, 2, 2, 2, 2, 2, 2, 2, 2, 10}, rows);
}

Dataset generate(std::string_view name) {
  if (name == "example1") return generate_example1();
  if (name == "problem1") return generate_problem1();
  if (name == "problem2") return generate_problem2();
  throw ConfigError(fmt::format("unknown generator '{}' (expected example1, problem1 or problem2)", name));
}

}  // namespace ctximp
