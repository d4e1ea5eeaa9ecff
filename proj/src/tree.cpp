#include "errsense/error.hpp"
#include "errsense/learn.hpp"
#include "errsense/rng.hpp"

#include <algorithm>
#include <tuple>
#include <numeric>

namespace errsense {

namespace {

struct Split {
  int feature{-1};
  double threshold{0.0};
  double score{0.0};
};

class Builder {
public:
  Builder(const Matrix& X, const Labels& y, std::span<const double> w, const TreeParams& p, Rng* rng)
      : X_(X), y_(y), w_(w), p_(p), rng_(rng), features_(static_cast<std::size_t>(X.cols())) {
    std::iota(features_.begin(), features_.end(), 0);
  }

  Tree build() {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < y_.size(); ++i) {
      if (w_[i] > 0.0) rows.push_back(i);
    }
    grow(rows, 0);
    return std::move(tree_);
  }

private:
  int grow(std::vector<std::size_t>& rows, std::size_t depth) {
    double we = 0.0, wt = 0.0;
    for (std::size_t i : rows) {
      wt += w_[i];
      if (y_[i] == 1) we += w_[i];
    }
    const int id = static_cast<int>(tree_.nodes.size());
    tree_.nodes.push_back({});
    tree_.nodes[id].value = wt > 0.0 ? we / wt : 0.5;
    const bool pure = we <= 0.0 || we >= wt;
    if (pure || depth >= p_.max_depth || rows.size() < 2 * p_.min_leaf) return id;

    const Split s = best_split(rows, we, wt);
    if (s.feature < 0) return id;

    std::vector<std::size_t> left, right;
    for (std::size_t i : rows) {
      (X_(static_cast<Eigen::Index>(i), s.feature) <= s.threshold ? left : right).push_back(i);
    }
    rows.clear();
    rows.shrink_to_fit();
    tree_.nodes[id].feature = s.feature;
    tree_.nodes[id].threshold = s.threshold;
    const int l = grow(left, depth + 1);
    const int r = grow(right, depth + 1);
    tree_.nodes[id].left = l;
    tree_.nodes[id].right = r;
    return id;
  }

  std::vector<std::size_t> candidate_features() {
    const std::size_t d = features_.size();
    const std::size_t m = p_.max_features == 0 ? d : std::min(p_.max_features, d);
    if (m == d || rng_ == nullptr) return features_;
    std::vector<std::size_t> pool = features_;
    for (std::size_t i = 0; i < m; ++i) {
      std::swap(pool[i], pool[i + rng_->below(d - i)]);
    }
    pool.resize(m);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

  Split best_split(const std::vector<std::size_t>& rows, double we, double wt) {
    Split best;
    // Maximise sum over children of (e^2 + n^2) / W, which minimises the
    // weighted Gini impurity. It must beat the unsplit node.
    const double parent = (we * we + (wt - we) * (wt - we)) / wt;
    best.score = parent + 1e-12 * parent;
    struct Item {
      double x;
      double w;
      int y;
    };
    std::vector<Item> items(rows.size());
    for (std::size_t f : candidate_features()) {
      for (std::size_t k = 0; k < rows.size(); ++k) {
        const std::size_t i = rows[k];
        items[k] = {X_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(f)), w_[i], y_[i]};
      }
      // Ties broken on label and weight so the split does not depend on row order.
      std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) {
        return std::tie(a.x, a.y, a.w) < std::tie(b.x, b.y, b.w);
      });
      double le = 0.0, lt = 0.0;
      for (std::size_t k = 0; k + 1 < items.size(); ++k) {
        lt += items[k].w;
        if (items[k].y == 1) le += items[k].w;
        if (items[k].x == items[k + 1].x) continue;
        const std::size_t n_left = k + 1;
        if (n_left < p_.min_leaf || items.size() - n_left < p_.min_leaf) continue;
        const double re = we - le;
        const double rt = wt - lt;
        if (lt <= 0.0 || rt <= 0.0) continue;
        const double score = (le * le + (lt - le) * (lt - le)) / lt + (re * re + (rt - re) * (rt - re)) / rt;
        if (score > best.score) {
          best.score = score;
          best.feature = static_cast<int>(f);
          best.threshold = items[k].x + 0.5 * (items[k + 1].x - items[k].x);
        }
      }
    }
    return best;
  }

  const Matrix& X_;
  const Labels& y_;
  std::span<const double> w_;
  TreeParams p_;
  Rng* rng_;
  std::vector<std::size_t> features_;
  Tree tree_;
};

} // namespace

double Tree::predict(std::span<const double> row) const {
  std::size_t i = 0;
  while (nodes[i].feature >= 0) {
    i = static_cast<std::size_t>(row[static_cast<std::size_t>(nodes[i].feature)] <= nodes[i].threshold
                                     ? nodes[i].left
                                     : nodes[i].right);
  }
  return nodes[i].value;
}

Tree fit_tree(const Matrix& X, const Labels& y, std::span<const double> weights, const TreeParams& p, Rng* rng) {
  if (static_cast<std::size_t>(X.rows()) != y.size() || weights.size() != y.size()) {
    throw ParameterError("tree inputs disagree in length");
  }
  if (p.min_leaf == 0) throw ParameterError("min_leaf must be at least 1");
  return Builder(X, y, weights, p, rng).build();
}

void check_binary_labels(const Matrix& X, const Labels& y, std::size_t min_rows) {
  if (static_cast<std::size_t>(X.rows()) != y.size()) {
    throw ParameterError("feature matrix and labels disagree in length");
  }
  if (y.size() < min_rows) {
    throw ParameterError("need at least " + std::to_string(min_rows) + " training rows");
  }
  bool has0 = false, has1 = false;
  for (int v : y) {
    if (v == 1) has1 = true;
    else if (v == 0) has0 = true;
    else throw ParameterError("labels must be 0 or 1");
  }
  if (!has0 || !has1) throw DegenerateLabelError("training labels contain a single class");
  if (!X.allFinite()) throw ParameterError("feature matrix contains non-finite values");
}

} // namespace errsense
