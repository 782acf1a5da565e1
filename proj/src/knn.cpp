#include "amcontrast/knn.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

namespace amc {

namespace {
constexpr std::size_t kLeafSize = 12;

auto heap_cmp = [](const Neighbor& a, const Neighbor& b) { return neighbor_less(a, b); };
}  // namespace

NeighborIndex::NeighborIndex(const Mat& positions) : positions_(positions) {
  if (positions_.rows() < 1 || positions_.cols() != 3)
    throw std::invalid_argument("index needs an n x 3 position matrix with n >= 1");
  if (!positions_.allFinite()) throw std::invalid_argument("non-finite coordinate");
  order_.resize(size());
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  nodes_.reserve(2 * size() / kLeafSize + 2);
  root_ = build(0, size());
}

std::size_t NeighborIndex::build(std::size_t begin, std::size_t end) {
  const std::size_t id = nodes_.size();
  nodes_.push_back(Node{});
  nodes_[id].begin = begin;
  nodes_[id].end = end;
  if (end - begin <= kLeafSize) return id;

  int axis = 0;
  double widest = -1.0;
  for (int c = 0; c < 3; ++c) {
    double lo = positions_(order_[begin], c), hi = lo;
    for (std::size_t i = begin; i < end; ++i) {
      lo = std::min(lo, positions_(order_[i], c));
      hi = std::max(hi, positions_(order_[i], c));
    }
    if (hi - lo > widest) {
      widest = hi - lo;
      axis = c;
    }
  }
  if (widest <= 0.0) return id;  // all coincident: keep as one leaf

  const std::size_t mid = begin + (end - begin) / 2;
  std::nth_element(order_.begin() + begin, order_.begin() + mid, order_.begin() + end,
                   [&](std::size_t a, std::size_t b) {
                     return positions_(a, axis) < positions_(b, axis);
                   });
  // left holds coordinates <= split, right >= split
  const double split = positions_(order_[mid], axis);
  const std::size_t left = build(begin, mid);
  const std::size_t right = build(mid, end);
  nodes_[id].axis = axis;
  nodes_[id].split = split;
  nodes_[id].left = left;
  nodes_[id].right = right;
  return id;
}

void NeighborIndex::search(std::size_t node_id, const double* q, std::size_t k,
                           std::size_t exclude, std::vector<Neighbor>& heap) const {
  const Node& node = nodes_[node_id];
  if (node.axis < 0) {
    for (std::size_t i = node.begin; i < node.end; ++i) {
      const std::size_t idx = order_[i];
      if (idx == exclude) continue;
      Neighbor cand{idx, squared_distance(q, positions_, idx)};
      if (heap.size() < k) {
        heap.push_back(cand);
        std::push_heap(heap.begin(), heap.end(), heap_cmp);
      } else if (neighbor_less(cand, heap.front())) {
        std::pop_heap(heap.begin(), heap.end(), heap_cmp);
        heap.back() = cand;
        std::push_heap(heap.begin(), heap.end(), heap_cmp);
      }
    }
    return;
  }
  const double diff = q[node.axis] - node.split;
  const std::size_t near = diff < 0.0 ? node.left : node.right;
  const std::size_t far = diff < 0.0 ? node.right : node.left;
  search(near, q, k, exclude, heap);
  // equality must still be visited: a tied point with a smaller index may live there
  if (heap.size() < k || diff * diff <= heap.front().sq_dist) search(far, q, k, exclude, heap);
}

std::vector<Neighbor> NeighborIndex::nearest(const double* query, std::size_t k,
                                             std::size_t exclude) const {
  std::vector<Neighbor> heap;
  if (k == 0) return heap;
  heap.reserve(k);
  search(root_, query, k, exclude, heap);
  std::sort_heap(heap.begin(), heap.end(), heap_cmp);
  return heap;
}

std::vector<Neighbor> NeighborIndex::knn(std::size_t anchor, std::size_t k) const {
  if (anchor >= size()) throw std::invalid_argument("anchor index out of range");
  if (k < 1 || k > size())
    throw std::invalid_argument("K=" + std::to_string(k) + " must lie in [1, " +
                                std::to_string(size()) + "]");
  const double q[3] = {positions_(anchor, 0), positions_(anchor, 1), positions_(anchor, 2)};
  std::vector<Neighbor> out;
  out.reserve(k);
  out.push_back({anchor, 0.0});
  auto rest = nearest(q, k - 1, anchor);
  out.insert(out.end(), rest.begin(), rest.end());
  return out;
}

NeighborIndex build_index(const Mat& positions) { return NeighborIndex(positions); }

std::vector<Neighbor> knn(const NeighborIndex& index, std::size_t anchor, std::size_t k) {
  return index.knn(anchor, k);
}

NeighborPartition partition(std::span<const Neighbor> neighbors, std::span<const int> labels,
                            std::size_t anchor) {
  NeighborPartition part;
  part.anchor = anchor;
  const int own = labels[anchor];
  for (const auto& nb : neighbors) {
    if (labels[nb.index] == own) {
      part.intra.push_back(nb.index);
      part.d_plus += nb.sq_dist;
    } else {
      part.inter.push_back(nb.index);
      part.d_minus += nb.sq_dist;
    }
  }
  return part;
}

std::vector<NeighborPartition> partition_all(const NeighborIndex& index,
                                             std::span<const int> labels, std::size_t k) {
  if (labels.size() != index.size()) throw std::invalid_argument("label count mismatch");
  const std::size_t kk = std::min(k, index.size());
  std::vector<NeighborPartition> parts(index.size());
  for (std::size_t i = 0; i < index.size(); ++i) parts[i] = partition(index.knn(i, kk), labels, i);
  return parts;
}

}  // namespace amc
