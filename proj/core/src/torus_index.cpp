#include "sapa/torus_index.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <stdexcept>

namespace sapa {

namespace {
constexpr int kMaxCells = 1 << 21;
}

TorusIndex::TorusIndex(double a, double b, double delta, double initial_n_prime)
    : a_(a), b_(b), delta_(delta), np_floor_(initial_n_prime) {
  if (!(a >= 0.0) || !(b > 0.0) || !(delta > 0.0) || !(delta <= 1.0) || !(initial_n_prime >= 1.0))
    throw std::invalid_argument("TorusIndex: need a >= 0, b > 0, delta in (0, 1], n' >= 1");
  ncells_ = static_cast<int>(std::min<double>(kMaxCells, std::max(1.0, std::floor(1.0 / delta))));
  cell_width_ = 1.0 / static_cast<double>(ncells_);
  cells_.resize(static_cast<std::size_t>(ncells_));
}

double TorusIndex::torus_dist(double x, double y) {
  const double direct = std::fabs(x - y);
  return std::min(direct, 1.0 - direct);
}

double TorusIndex::radius_bound(long degree) const {
  // ball length (a*deg + b)/n' capped at the whole torus
  const double length = std::min(1.0, (a_ * static_cast<double>(degree) + b_) / np_floor_);
  return length / 2.0;
}

void TorusIndex::insert(std::int32_t id, double position) {
  if (id < 0 || !(position >= 0.0 && position < 1.0))
    throw std::invalid_argument("TorusIndex::insert: need id >= 0 and position in [0, 1)");
  if (static_cast<std::size_t>(id) >= slots_.size())
    slots_.resize(static_cast<std::size_t>(id) + 1);
  Slot& s = slots_[static_cast<std::size_t>(id)];
  if (s.degree >= 0) throw std::logic_error("TorusIndex::insert: duplicate id");
  s.pos = position;
  s.degree = 0;
  ++live_;
  if (radius_bound(0) > delta_) {
    s.cell = -1;
    heavy_.push_back(id);
  } else {
    s.cell = static_cast<std::int32_t>(
        std::min<double>(ncells_ - 1, std::floor(position / cell_width_)));
    cells_[static_cast<std::size_t>(s.cell)].push_back(id);
  }
}

void TorusIndex::promote(std::int32_t id) {
  Slot& s = slots_[static_cast<std::size_t>(id)];
  if (s.cell < 0) return;
  auto& bucket = cells_[static_cast<std::size_t>(s.cell)];
  bucket.erase(std::find(bucket.begin(), bucket.end(), id));
  s.cell = -1;
  heavy_.push_back(id);
}

void TorusIndex::bump_degree(std::int32_t id, long new_degree, double n_prime) {
  if (id < 0 || static_cast<std::size_t>(id) >= slots_.size() ||
      slots_[static_cast<std::size_t>(id)].degree < 0)
    throw std::invalid_argument("TorusIndex::bump_degree: unknown id");
  np_floor_ = std::max(np_floor_, n_prime);
  Slot& s = slots_[static_cast<std::size_t>(id)];
  s.degree = new_degree;
  const double radius =
      std::min(1.0, (a_ * static_cast<double>(new_degree) + b_) / n_prime) / 2.0;
  if (radius > delta_) promote(id);
}

void TorusIndex::query_balls(double x, double n_prime, double a, double b,
                             std::vector<std::int32_t>& out) const {
  assert(a == a_ && b == b_ && "light-tier completeness needs the construction-time a, b");
  out.clear();
  np_floor_ = std::max(np_floor_, n_prime);
  ++stats_.queries;
  const double scale = 1.0 / (2.0 * n_prime);
  const auto test = [&](std::int32_t id) {
    const Slot& s = slots_[static_cast<std::size_t>(id)];
    const double radius =
        std::min(0.5, (a * static_cast<double>(s.degree) + b) * scale);
    if (torus_dist(x, s.pos) < radius) {
      out.push_back(id);
      ++stats_.hits;
    }
  };

  stats_.heavy_touched += heavy_.size();
  for (std::int32_t id : heavy_) test(id);

  // Light vertices have radius <= delta, so every light hit lies in the
  // circular window [x - delta, x + delta]; scan the cells covering it.
  const long k_lo = static_cast<long>(std::floor((x - delta_) / cell_width_));
  const long k_hi = static_cast<long>(std::floor((x + delta_) / cell_width_));
  const long span = std::min<long>(k_hi - k_lo + 1, ncells_);
  for (long k = 0; k < span; ++k) {
    long cell = (k_lo + k) % ncells_;
    if (cell < 0) cell += ncells_;
    const auto& bucket = cells_[static_cast<std::size_t>(cell)];
    stats_.light_touched += bucket.size();
    for (std::int32_t id : bucket) test(id);
  }
}

std::vector<std::int32_t> TorusIndex::query_balls(double x, double n_prime, double a,
                                                  double b) const {
  std::vector<std::int32_t> out;
  query_balls(x, n_prime, a, b, out);
  return out;
}

}  // namespace sapa
