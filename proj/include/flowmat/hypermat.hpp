#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace flowmat {

/// One directed (source row, destination column) packet count.
struct Triple {
  std::uint32_t row = 0;
  std::uint32_t col = 0;
  std::uint64_t val = 0;

  friend bool operator==(const Triple&, const Triple&) = default;
};

/// Doubly-compressed sparse matrix over the full 2^32 x 2^32 IPv4 space.
///
/// Only rows holding at least one entry are stored: `rows_present` lists
/// them in increasing order and `row_ptr[i]..row_ptr[i+1]` spans that row's
/// entries in `col_ids`/`vals`. Columns are strictly increasing within a row
/// and every value is at least 1, so two equal matrices have identical
/// arrays. Storage is proportional to entries plus present rows.
class HyperMatrix {
 public:
  static constexpr std::uint64_t kDimension = std::uint64_t{1} << 32;

  HyperMatrix() : row_ptr_{0} {}

  /// Sorts by (row, col) and sums duplicates. Zero-valued triples are
  /// dropped. Throws OverflowError if a summed entry exceeds 64 bits.
  static HyperMatrix build(std::span<const Triple> triples);

  /// Adopts arrays that must already be canonical; throws IntegrityError
  /// describing the first violated invariant otherwise.
  static HyperMatrix from_arrays(std::vector<std::uint32_t> rows_present,
                                 std::vector<std::uint64_t> row_ptr,
                                 std::vector<std::uint32_t> col_ids,
                                 std::vector<std::uint64_t> vals);

  std::uint64_t nrows() const noexcept { return kDimension; }
  std::uint64_t ncols() const noexcept { return kDimension; }
  std::size_t nvals() const noexcept { return vals_.size(); }
  std::size_t nrows_present() const noexcept { return rows_present_.size(); }

  std::span<const std::uint32_t> rows_present() const noexcept { return rows_present_; }
  std::span<const std::uint64_t> row_ptr() const noexcept { return row_ptr_; }
  std::span<const std::uint32_t> col_ids() const noexcept { return col_ids_; }
  std::span<const std::uint64_t> vals() const noexcept { return vals_; }

  /// Bytes held by the four arrays (by capacity).
  std::size_t storage_bytes() const noexcept;

  friend bool operator==(const HyperMatrix&, const HyperMatrix&) = default;

 private:
  std::vector<std::uint32_t> rows_present_;
  std::vector<std::uint64_t> row_ptr_;
  std::vector<std::uint32_t> col_ids_;
  std::vector<std::uint64_t> vals_;
};

struct Degree {
  std::uint32_t index = 0;
  std::uint64_t degree = 0;

  friend bool operator==(const Degree&, const Degree&) = default;
};

/// Sum of all values; throws OverflowError past 64 bits.
std::uint64_t total_sum(const HyperMatrix& m);

/// (row, number of stored entries) for each present row, by row.
std::vector<Degree> row_degrees(const HyperMatrix& m);

/// (column, number of rows reaching it) for each referenced column, by column.
std::vector<Degree> col_degrees(const HyperMatrix& m);

/// Entries in (row, col) order; build(to_triples(m)) == m.
std::vector<Triple> to_triples(const HyperMatrix& m);

}  // namespace flowmat
