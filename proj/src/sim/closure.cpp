#include "gkm/error.hpp"
#include "gkm/sim.hpp"

#include <algorithm>
#include <optional>

namespace gkm {

namespace {

using Bits = std::vector<std::uint64_t>;

void
collect_atoms(const KeyTerm& t, std::map<KeyTerm, std::size_t>& index)
{
  for (const auto& a : t.xor_atoms()) {
    if (index.contains(a)) {
      continue;
    }
    index.emplace(a, index.size());
    if (a.kind() != TermKind::Fresh) {
      collect_atoms(a.base(), index);
    }
  }
}

bool
test_bit(const Bits& v, std::size_t i)
{
  return ((v[i / 64] >> (i % 64)) & 1U) != 0;
}

void
xor_into(Bits& dst, const Bits& src)
{
  for (std::size_t i = 0; i < dst.size(); ++i) {
    dst[i] ^= src[i];
  }
}

} // namespace

bool
Closure::derivable(const KeyTerm& t) const
{
  if (t.kind() == TermKind::Zero) {
    return true;
  }
  if (t.is_atom()) {
    auto it = atom_index_.find(t);
    if (it == atom_index_.end() || pivot_row_[it->second] < 0) {
      return false;
    }
    const auto& row = rows_[static_cast<std::size_t>(pivot_row_[it->second])];
    std::size_t weight = 0;
    for (auto w : row) {
      weight += static_cast<std::size_t>(__builtin_popcountll(w));
    }
    return weight == 1;
  }
  const std::size_t words = (atom_index_.size() + 63) / 64;
  Bits v(words, 0);
  for (const auto& a : t.xor_atoms()) {
    auto it = atom_index_.find(a);
    if (it == atom_index_.end()) {
      return false;
    }
    v[it->second / 64] ^= std::uint64_t{ 1 } << (it->second % 64);
  }
  // Each row's lowest bit is its pivot, so reducing left to right is enough.
  for (std::size_t w = 0; w < words; ++w) {
    while (v[w] != 0) {
      const std::size_t i = w * 64 + static_cast<std::size_t>(__builtin_ctzll(v[w]));
      if (pivot_row_[i] < 0) {
        return false;
      }
      xor_into(v, rows_[static_cast<std::size_t>(pivot_row_[i])]);
    }
  }
  return true;
}

Closure
attacker_closure(const AttackerView& view, const std::vector<KeyTerm>& extra_universe)
{
  Closure c;
  for (const auto& k : view.known) {
    collect_atoms(k, c.atom_index_);
  }
  for (const auto& ct : view.observed) {
    collect_atoms(ct.enc_key, c.atom_index_);
    for (const auto& p : ct.payload) {
      collect_atoms(p, c.atom_index_);
    }
  }
  for (const auto& t : extra_universe) {
    collect_atoms(t, c.atom_index_);
  }
  const std::size_t n = c.atom_index_.size();
  const std::size_t words = (n + 63) / 64;
  c.pivot_row_.assign(n, -1);

  std::vector<KeyTerm> atoms(n, KeyTerm::zero());
  for (const auto& [a, i] : c.atom_index_) {
    atoms[i] = a;
  }

  // Hash iterates of the same base with fewer rounds.
  std::vector<std::vector<std::size_t>> shorter(n);
  std::map<KeyTerm, std::vector<std::size_t>> chains;
  for (std::size_t i = 0; i < n; ++i) {
    if (atoms[i].kind() == TermKind::HashIter) {
      chains[atoms[i].base()].push_back(i);
    }
  }
  for (const auto& [base, chain] : chains) {
    for (auto i : chain) {
      for (auto j : chain) {
        if (atoms[j].count() < atoms[i].count()) {
          shorter[i].push_back(j);
        }
      }
    }
  }

  // Adds t to the span, keeping rows in reduced row echelon form.
  auto learn = [&](const KeyTerm& t) {
    c.terms_.insert(t);
    Bits v(words, 0);
    for (const auto& a : t.xor_atoms()) {
      const auto i = c.atom_index_.at(a);
      v[i / 64] ^= std::uint64_t{ 1 } << (i % 64);
    }
    std::optional<std::size_t> pivot;
    for (std::size_t w = 0; w < words && !pivot; ++w) {
      std::uint64_t pending = v[w];
      while (pending != 0) {
        const std::size_t i = w * 64 + static_cast<std::size_t>(__builtin_ctzll(pending));
        if (c.pivot_row_[i] < 0) {
          pivot = i;
          break;
        }
        xor_into(v, c.rows_[static_cast<std::size_t>(c.pivot_row_[i])]);
        pending = v[w] & ~((std::uint64_t{ 2 } << (i % 64)) - 1);
      }
    }
    if (!pivot) {
      return false;
    }
    // Clear the remaining pivot columns above the new pivot as well.
    for (std::size_t i = *pivot + 1; i < n; ++i) {
      if (test_bit(v, i) && c.pivot_row_[i] >= 0) {
        xor_into(v, c.rows_[static_cast<std::size_t>(c.pivot_row_[i])]);
      }
    }
    for (auto& row : c.rows_) {
      if (test_bit(row, *pivot)) {
        xor_into(row, v);
      }
    }
    c.pivot_row_[*pivot] = static_cast<std::ptrdiff_t>(c.rows_.size());
    c.rows_.push_back(std::move(v));
    return true;
  };

  for (const auto& k : view.known) {
    learn(k);
  }

  std::vector<bool> opened(view.observed.size(), false);
  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t i = 0; i < view.observed.size(); ++i) {
      const auto& ct = view.observed[i];
      if (opened[i] || !c.derivable(ct.enc_key)) {
        continue;
      }
      opened[i] = true;
      c.opened_.push_back(ct.seq);
      for (const auto& p : ct.payload) {
        learn(p);
      }
      changed = true;
    }
    // One-way functions only run forward: H^m(t) yields H^n(t) for n > m.
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = atoms[i];
      if (a.kind() == TermKind::Fresh || c.derivable(a)) {
        continue;
      }
      bool reachable = c.derivable(a.base());
      for (std::size_t j = 0; !reachable && j < shorter[i].size(); ++j) {
        reachable = c.derivable(atoms[shorter[i][j]]);
      }
      if (reachable) {
        learn(a);
        changed = true;
      }
    }
  }
  std::sort(c.opened_.begin(), c.opened_.end());
  return c;
}

} // namespace gkm
