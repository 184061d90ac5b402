#include "shearforge/truncpoly.hpp"

namespace shearforge {

namespace {

void enumerate_degree(int n, int d, std::vector<int>& cur, int pos, int left,
                      std::vector<std::vector<int>>& out) {
  if (pos == n - 1) {
    cur[pos] = left;
    out.push_back(cur);
    return;
  }
  // descending exponent on the current variable gives graded-lex order
  for (int e = left; e >= 0; --e) {
    cur[pos] = e;
    enumerate_degree(n, d, cur, pos + 1, left - e, out);
  }
}

}  // namespace

MonomialTable::MonomialTable(int n, int k) : n_(n), k_(k) {
  if (n < 1 || k < 0) throw DimensionError("bad monomial table shape");
  offset_.push_back(0);
  for (int d = 0; d <= k; ++d) {
    std::vector<int> cur(n, 0);
    enumerate_degree(n, d, cur, 0, d, exps_);
    offset_.push_back(static_cast<int>(exps_.size()));
  }
  deg_.resize(exps_.size());
  for (size_t r = 0; r < exps_.size(); ++r) {
    int d = 0;
    for (int e : exps_[r]) d += e;
    deg_[r] = d;
    rank_[key(exps_[r])] = static_cast<int>(r);
  }
  const size_t t = exps_.size();
  prod_.assign(t * t, -1);
  std::vector<int> sum(n);
  for (size_t i = 0; i < t; ++i)
    for (size_t j = 0; j < t; ++j) {
      if (deg_[i] + deg_[j] > k) continue;
      for (int v = 0; v < n; ++v) sum[v] = exps_[i][v] + exps_[j][v];
      prod_[i * t + j] = rank_of(sum);
    }
  bump_.assign(t * n, -1);
  for (size_t r = 0; r < t; ++r) {
    if (deg_[r] == k) continue;
    for (int v = 0; v < n; ++v) {
      std::vector<int> e = exps_[r];
      e[v] += 1;
      bump_[r * n + v] = rank_of(e);
    }
  }
  split_.assign(t, {-1, -1});
  for (size_t r = 1; r < t; ++r) {
    for (int v = 0; v < n; ++v) {
      if (exps_[r][v] > 0) {
        std::vector<int> e = exps_[r];
        e[v] -= 1;
        split_[r] = {v, rank_of(e)};
        break;
      }
    }
  }
}

std::string MonomialTable::key(const std::vector<int>& e) {
  std::string s;
  s.reserve(e.size());
  for (int x : e) s.push_back(static_cast<char>(x + 1));
  return s;
}

int MonomialTable::rank_of(const std::vector<int>& e) const {
  if (static_cast<int>(e.size()) != n_) throw DimensionError("exponent arity mismatch");
  auto it = rank_.find(key(e));
  return it == rank_.end() ? -1 : it->second;
}

std::shared_ptr<const MonomialTable> MonomialTable::get(int n, int k) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, std::shared_ptr<const MonomialTable>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_pair(n, k);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto tab = std::shared_ptr<const MonomialTable>(new MonomialTable(n, k));
  cache[key] = tab;
  return tab;
}

}  // namespace shearforge
