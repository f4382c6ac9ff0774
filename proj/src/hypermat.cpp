#include "flowmat/hypermat.hpp"

#include <algorithm>
#include <string>

#include "flowmat/error.hpp"
#include "flowmat/radix_sort.hpp"

namespace flowmat {

namespace {

struct KeyedValue {
  std::uint64_t key;  // row << 32 | col
  std::uint64_t val;
};

}  // namespace

HyperMatrix HyperMatrix::build(std::span<const Triple> triples) {
  std::vector<KeyedValue> items;
  items.reserve(triples.size());
  for (const Triple& t : triples) {
    if (t.val == 0) continue;
    items.push_back({std::uint64_t{t.row} << 32 | t.col, t.val});
  }
  std::vector<KeyedValue> scratch;
  radix_sort_u64(items, scratch, [](const KeyedValue& kv) { return kv.key; });
  scratch = {};

  // Fold duplicates in place, then split into the compressed arrays.
  std::size_t unique = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (unique > 0 && items[unique - 1].key == items[i].key) {
      std::uint64_t& acc = items[unique - 1].val;
      if (acc > UINT64_MAX - items[i].val) {
        throw OverflowError("packet count overflow at row " + std::to_string(items[i].key >> 32) +
                            ", col " + std::to_string(items[i].key & 0xffffffffu));
      }
      acc += items[i].val;
    } else {
      items[unique++] = items[i];
    }
  }
  items.resize(unique);

  HyperMatrix m;
  m.col_ids_.reserve(unique);
  m.vals_.reserve(unique);
  for (std::size_t i = 0; i < unique; ++i) {
    const auto row = static_cast<std::uint32_t>(items[i].key >> 32);
    if (m.rows_present_.empty() || m.rows_present_.back() != row) {
      if (!m.rows_present_.empty()) m.row_ptr_.push_back(i);
      m.rows_present_.push_back(row);
    }
    m.col_ids_.push_back(static_cast<std::uint32_t>(items[i].key));
    m.vals_.push_back(items[i].val);
  }
  if (!m.rows_present_.empty()) m.row_ptr_.push_back(unique);
  m.rows_present_.shrink_to_fit();
  m.row_ptr_.shrink_to_fit();
  return m;
}

HyperMatrix HyperMatrix::from_arrays(std::vector<std::uint32_t> rows_present,
                                     std::vector<std::uint64_t> row_ptr,
                                     std::vector<std::uint32_t> col_ids,
                                     std::vector<std::uint64_t> vals) {
  if (col_ids.size() != vals.size()) {
    throw IntegrityError("col_ids and vals differ in length");
  }
  if (row_ptr.size() != rows_present.size() + 1) {
    throw IntegrityError("row_ptr length is not rows_present + 1");
  }
  if (row_ptr.front() != 0 || row_ptr.back() != vals.size()) {
    throw IntegrityError("row_ptr does not span [0, nvals]");
  }
  for (std::size_t i = 0; i < rows_present.size(); ++i) {
    if (i > 0 && rows_present[i] <= rows_present[i - 1]) {
      throw IntegrityError("rows_present not strictly increasing at index " + std::to_string(i));
    }
    if (row_ptr[i + 1] <= row_ptr[i]) {
      throw IntegrityError("empty or inverted row at index " + std::to_string(i));
    }
  }
  // row_ptr is now known to rise strictly to nvals, so every span is in range.
  for (std::size_t i = 0; i < rows_present.size(); ++i) {
    for (std::uint64_t k = row_ptr[i] + 1; k < row_ptr[i + 1]; ++k) {
      if (col_ids[k] <= col_ids[k - 1]) {
        throw IntegrityError("col_ids not strictly increasing in row " +
                             std::to_string(rows_present[i]));
      }
    }
  }
  if (std::find(vals.begin(), vals.end(), std::uint64_t{0}) != vals.end()) {
    throw IntegrityError("zero value stored");
  }
  HyperMatrix m;
  m.rows_present_ = std::move(rows_present);
  m.row_ptr_ = std::move(row_ptr);
  m.col_ids_ = std::move(col_ids);
  m.vals_ = std::move(vals);
  return m;
}

std::size_t HyperMatrix::storage_bytes() const noexcept {
  return rows_present_.capacity() * sizeof(std::uint32_t) +
         row_ptr_.capacity() * sizeof(std::uint64_t) +
         col_ids_.capacity() * sizeof(std::uint32_t) + vals_.capacity() * sizeof(std::uint64_t);
}

std::uint64_t total_sum(const HyperMatrix& m) {
  std::uint64_t sum = 0;
  for (std::uint64_t v : m.vals()) {
    if (sum > UINT64_MAX - v) throw OverflowError("matrix packet total exceeds 64 bits");
    sum += v;
  }
  return sum;
}

std::vector<Degree> row_degrees(const HyperMatrix& m) {
  std::vector<Degree> out;
  out.reserve(m.nrows_present());
  auto rows = m.rows_present();
  auto ptr = m.row_ptr();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out.push_back({rows[i], ptr[i + 1] - ptr[i]});
  }
  return out;
}

std::vector<Degree> col_degrees(const HyperMatrix& m) {
  std::vector<std::uint32_t> cols(m.col_ids().begin(), m.col_ids().end());
  std::sort(cols.begin(), cols.end());
  std::vector<Degree> out;
  for (std::size_t i = 0; i < cols.size();) {
    std::size_t j = i;
    while (j < cols.size() && cols[j] == cols[i]) ++j;
    out.push_back({cols[i], j - i});
    i = j;
  }
  return out;
}

std::vector<Triple> to_triples(const HyperMatrix& m) {
  std::vector<Triple> out;
  out.reserve(m.nvals());
  auto rows = m.rows_present();
  auto ptr = m.row_ptr();
  auto cols = m.col_ids();
  auto vals = m.vals();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::uint64_t k = ptr[i]; k < ptr[i + 1]; ++k) {
      out.push_back({rows[i], cols[k], vals[k]});
    }
  }
  return out;
}

}  // namespace flowmat
