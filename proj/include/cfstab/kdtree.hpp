#ifndef CFSTAB_KDTREE_HPP
#define CFSTAB_KDTREE_HPP

#include <algorithm>
#include <numeric>
#include <queue>
#include <vector>

#include "cfstab/linalg.hpp"

namespace cfstab {

/// Static kd-tree over the rows of an n x d block for Euclidean k-nearest-neighbour queries.
class KdTree {
 public:
  explicit KdTree(const Matrix& points, std::size_t leaf_size = 16) : pts_(&points), leaf_(leaf_size) {
    idx_.resize(points.rows());
    std::iota(idx_.begin(), idx_.end(), 0);
    if (!idx_.empty()) build(0, idx_.size(), 0);
  }

  /// Squared distance from row `query` to its k-th nearest other row.
  double kth_neighbour_sq(std::size_t query, std::size_t k) const {
    require(k >= 1 && k < pts_->rows(), ErrorKind::InvalidArgument, "k must lie in [1, n)");
    Heap heap;
    search(0, query, k, heap);
    return heap.top();
  }

 private:
  struct Node {
    std::size_t begin, end;
    std::size_t axis = 0;
    double split = 0.0;
    int left = -1, right = -1;
  };
  using Heap = std::priority_queue<double>;

  int build(std::size_t begin, std::size_t end, std::size_t depth) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.push_back(Node{begin, end});
    if (end - begin <= leaf_) return id;
    // Split on the axis of largest spread.
    const std::size_t d = pts_->cols();
    std::size_t axis = depth % d;
    double best = -1.0;
    for (std::size_t m = 0; m < d; ++m) {
      double lo = (*pts_)(idx_[begin], m), hi = lo;
      for (std::size_t i = begin; i < end; ++i) {
        lo = std::min(lo, (*pts_)(idx_[i], m));
        hi = std::max(hi, (*pts_)(idx_[i], m));
      }
      if (hi - lo > best) {
        best = hi - lo;
        axis = m;
      }
    }
    const std::size_t mid = begin + (end - begin) / 2;
    std::nth_element(idx_.begin() + static_cast<std::ptrdiff_t>(begin), idx_.begin() + static_cast<std::ptrdiff_t>(mid),
                     idx_.begin() + static_cast<std::ptrdiff_t>(end),
                     [&](std::size_t a, std::size_t b) { return (*pts_)(a, axis) < (*pts_)(b, axis); });
    nodes_[id].axis = axis;
    nodes_[id].split = (*pts_)(idx_[mid], axis);
    const int l = build(begin, mid, depth + 1);
    const int r = build(mid, end, depth + 1);
    nodes_[id].left = l;
    nodes_[id].right = r;
    return id;
  }

  double dist_sq(std::size_t a, std::size_t b) const {
    double s = 0.0;
    for (std::size_t m = 0; m < pts_->cols(); ++m) {
      const double diff = (*pts_)(a, m) - (*pts_)(b, m);
      s += diff * diff;
    }
    return s;
  }

  void search(int id, std::size_t q, std::size_t k, Heap& heap) const {
    const Node& node = nodes_[static_cast<std::size_t>(id)];
    if (node.left < 0) {
      for (std::size_t i = node.begin; i < node.end; ++i) {
        if (idx_[i] == q) continue;
        const double dd = dist_sq(q, idx_[i]);
        if (heap.size() < k) {
          heap.push(dd);
        } else if (dd < heap.top()) {
          heap.pop();
          heap.push(dd);
        }
      }
      return;
    }
    const double diff = (*pts_)(q, node.axis) - node.split;
    const int near = diff < 0.0 ? node.left : node.right;
    const int far = diff < 0.0 ? node.right : node.left;
    search(near, q, k, heap);
    if (heap.size() < k || diff * diff < heap.top()) search(far, q, k, heap);
  }

  const Matrix* pts_;
  std::size_t leaf_;
  std::vector<std::size_t> idx_;
  std::vector<Node> nodes_;
};

}  // namespace cfstab

#endif  // CFSTAB_KDTREE_HPP
