#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ctximp {

enum class ColumnKind { categorical, numeric };

std::string_view to_string(ColumnKind kind);

/// One named column. Categorical columns hold dense codes plus the code->label
/// table; numeric columns hold raw values.
struct Column {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::vector<std::uint32_t> codes;
  std::vector<std::string> labels;
  std::vector<double> values;

  [[nodiscard]] std::size_t size() const {
    return kind == ColumnKind::categorical ? codes.size() : values.size();
  }
  [[nodiscard]] std::size_t arity() const { return labels.size(); }
  [[nodiscard]] bool is_categorical() const { return kind == ColumnKind::categorical; }
  [[nodiscard]] std::string cell_text(std::size_t row) const;

  bool operator==(const Column&) const = default;
};

/// Builds a categorical column from labels. With `declared_labels` the code
/// order is fixed by that list, otherwise codes follow first appearance.
Column make_categorical(std::string name, std::span<const std::string> cells,
                        const std::optional<std::vector<std::string>>& declared_labels = std::nullopt);
Column make_categorical(std::string name, std::vector<std::uint32_t> codes,
                        std::vector<std::string> labels);
Column make_numeric(std::string name, std::vector<double> values);

/// Column list with equal lengths and unique names. Numeric columns are
/// allowed anywhere; this is the raw form used by pairwise mode.
class Table {
 public:
  Table() = default;
  explicit Table(std::vector<Column> columns);

  [[nodiscard]] const std::vector<Column>& columns() const { return columns_; }
  [[nodiscard]] const Column& column(std::size_t index) const { return columns_.at(index); }
  [[nodiscard]] std::size_t n_columns() const { return columns_.size(); }
  [[nodiscard]] std::size_t n_rows() const { return n_rows_; }
  /// Throws DataError for an unknown name.
  [[nodiscard]] std::size_t index_of(std::string_view name) const;
  [[nodiscard]] std::optional<std::size_t> find(std::string_view name) const;

  bool operator==(const Table&) const = default;

 private:
  std::vector<Column> columns_;
  std::size_t n_rows_ = 0;
};

/// Sample table with a designated target and an optional context column.
///
/// Every non-target column must be categorical. The context column, when
/// present, is excluded from the inputs.
class Dataset {
 public:
  Dataset() = default;
  Dataset(Table table, std::string_view target, std::optional<std::string_view> context);
  Dataset(Table table, std::size_t target, std::optional<std::size_t> context);

  [[nodiscard]] const Table& table() const { return table_; }
  [[nodiscard]] const std::vector<Column>& columns() const { return table_.columns(); }
  [[nodiscard]] const Column& column(std::size_t index) const { return table_.column(index); }
  [[nodiscard]] std::size_t n_samples() const { return table_.n_rows(); }
  [[nodiscard]] std::size_t target() const { return target_; }
  [[nodiscard]] std::optional<std::size_t> context() const { return context_; }
  [[nodiscard]] ColumnKind target_kind() const { return column(target_).kind; }
  [[nodiscard]] const Column& target_column() const { return column(target_); }
  /// Throws DataError if no context is designated.
  [[nodiscard]] const Column& context_column() const;
  [[nodiscard]] std::size_t context_arity() const;
  /// All columns other than target and context, in table order.
  [[nodiscard]] std::vector<std::size_t> input_columns() const;
  [[nodiscard]] std::size_t index_of(std::string_view name) const { return table_.index_of(name); }

  /// Rows in `rows` (ascending), keeping labels and arities unchanged.
  [[nodiscard]] Dataset select_rows(std::span<const std::uint32_t> rows) const;
  /// Copy with the codes of categorical column `index` replaced.
  [[nodiscard]] Dataset with_codes(std::size_t index, std::vector<std::uint32_t> codes) const;
  /// Row indices whose context code equals `value`.
  [[nodiscard]] std::vector<std::uint32_t> rows_in_context(std::uint32_t value) const;

  bool operator==(const Dataset&) const = default;

 private:
  void validate() const;

  Table table_;
  std::size_t target_ = 0;
  std::optional<std::size_t> context_;
};

struct ColumnSchema {
  std::string name;
  ColumnKind kind = ColumnKind::categorical;
  std::optional<std::vector<std::string>> declared_labels;
};

/// Schema reproducing `table`'s columns, label orders included.
std::vector<ColumnSchema> schema_of(const Table& table);

/// Reads a CSV into a raw table. An empty schema means every column is
/// categorical with first-appearance codes; otherwise names must match the
/// header exactly and in order.
Table read_table(const std::filesystem::path& path, std::span<const ColumnSchema> schema);

/// read_table plus designation checks. Numeric kind is accepted only for the
/// target column.
Dataset load_csv(const std::filesystem::path& path, std::span<const ColumnSchema> schema,
                 std::string_view target, std::optional<std::string_view> context);

/// Writes header plus one line per row, labels rather than codes.
void save_csv(const Table& table, const std::filesystem::path& path);
inline void save_csv(const Dataset& dataset, const std::filesystem::path& path) {
  save_csv(dataset.table(), path);
}
std::string to_csv(const Table& table);

// Benchmark generators. Columns are X_c, X_1..X_p, Y; labels are the decimal
// values so codes equal values.
Dataset generate_example1();
Dataset generate_problem1();
Dataset generate_problem2();
/// Dispatches on "example1", "problem1" or "problem2"; ConfigError otherwise.
Dataset generate(std::string_view name);

/// Seven-segment display pattern (top, upper-left, upper-right, middle,
/// lower-left, lower-right, bottom) for a decimal digit.
std::span<const std::uint8_t, 7> seven_segment(unsigned digit);

}  // namespace ctximp
