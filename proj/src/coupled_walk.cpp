#include "gwspeed/coupled_walk.hpp"

#include <ostream>
#include <string>

#include "gwspeed/errors.hpp"

namespace gwspeed {

const char* to_string(CouplingCase c) {
  switch (c) {
    case CouplingCase::backward_eta3_ge_eta4:
      return "eta3>=eta4";
    case CouplingCase::backward_eta3_lt_eta4:
      return "eta3<eta4";
    case CouplingCase::first_has_fewer:
      return "z1<z2";
  }
  return "?";
}

void BiasParams::validate() const {
  if (!(beta > 1.0)) throw PreconditionError("coupled walk needs beta > 1, got " + std::to_string(beta));
  if (d < 1) throw PreconditionError("backbone scale d must be >= 1");
}

CouplingSources CouplingSources::quantile(const ProgenyDistribution& p1,
                                          const ProgenyDistribution& p2) {
  return {p1, p2, quantile_couple(p1, p2)};
}

namespace {

std::string move_name(Destination d) {
  return d.is_parent() ? std::string("P") : "C" + std::to_string(d.child + 1);
}

std::uint64_t cache_key(int z1, int z2) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(z1)) << 32) |
         static_cast<std::uint32_t>(z2);
}

}  // namespace

void write_step_log(std::ostream& os, std::span<const StepRecord> steps) {
  os << "n,u,band_class,move1,move2,moveY,depth1,depth2,Y\n";
  const auto old_precision = os.precision(17);
  for (const auto& s : steps) {
    os << s.n << ',' << s.u << ',' << (s.band == BandClass::forward ? "forward" : "backward")
       << ',' << move_name(s.move1) << ',' << move_name(s.move2) << ','
       << static_cast<int>(s.move_y) << ',' << s.depth1 << ',' << s.depth2 << ',' << s.y
       << '\n';
  }
  os.precision(old_precision);
}

CoupledWalk::CoupledWalk(CouplingSources sources, BiasParams params, TableOptions opts)
    : sources_(std::move(sources)), params_(params), opts_(opts) {
  params_.validate();
  if (params_.d > 1 && (sources_.first.min_support() < params_.d ||
                        sources_.second.min_support() < params_.d)) {
    throw MinDegreeViolation("backbone scale d = " + std::to_string(params_.d) +
                             " needs every offspring count >= d");
  }
  threshold_ = params_.backbone_threshold();
}

void CoupledWalk::reset() {
  tree1_.reset();
  tree2_.reset();
  x1_ = x2_ = Tree::root();
  y_ = 0;
  n_ = 0;
  last_ = {};
}

const TablePair& CoupledWalk::tables(int z1, int z2) {
  const auto key = cache_key(z1, z2);
  auto it = cache_.find(key);
  if (it == cache_.end()) {
    it = cache_.emplace(key, coupled_tables(z1, z2, params_.beta, params_.d, opts_)).first;
  }
  return it->second;
}

void CoupledWalk::assign_offspring(Stream& rng) {
  const bool fresh1 = !tree1_.is_realized(x1_);
  const bool fresh2 = !tree2_.is_realized(x2_);
  if (fresh1 && fresh2) {
    const auto [z1, z2] = sources_.joint.sample(rng);
    tree1_.realize_children(x1_, z1);
    tree2_.realize_children(x2_, z2);
  } else if (fresh1) {
    tree1_.realize_children(x1_, sources_.first.sample(rng));
  } else if (fresh2) {
    tree2_.realize_children(x2_, sources_.second.sample(rng));
  }
}

const StepRecord& CoupledWalk::step(Stream& rng) {
  if (n_ == 0) {
    return step_with(threshold_ + (1.0 - threshold_) * rng.uniform_open_closed(), rng);
  }
  return step_with(rng.uniform_open_closed(), rng);
}

const StepRecord& CoupledWalk::step_with(double u, Stream& rng) {
  if (!(u > 0.0 && u <= 1.0)) throw PreconditionError("u must lie in (0,1]");
  const bool forward = u > threshold_;
  if (n_ == 0 && !forward) {
    throw PreconditionError("the first step must be drawn from (a, 1]");
  }
  assign_offspring(rng);
  const int z1 = tree1_.child_count(x1_);
  const int z2 = tree2_.child_count(x2_);
  const bool root1 = x1_ == Tree::root();
  const bool root2 = x2_ == Tree::root();

  Destination m1, m2;
  if (n_ == 0 && z1 >= z2) {
    // Forward region of the coupled tables: uniform over children on (a, 1].
    const TablePair& t = tables(z1, z2);
    m1 = t.first.lookup(u);
    m2 = t.second.lookup(u);
  } else if (root1 || root2) {
    // Root law is uniform over children. At time 0 it is applied to u
    // rescaled from (a, 1]; later a root is only reachable after Y has
    // returned to 0, where any u works.
    const double v = n_ == 0 ? (u - threshold_) / (1.0 - threshold_) : u;
    m1 = root1 ? single_walk_table(z1, 1.0, true).lookup(v)
               : single_walk_table(z1, params_.beta, false).lookup(u);
    m2 = root2 ? single_walk_table(z2, 1.0, true).lookup(v)
               : single_walk_table(z2, params_.beta, false).lookup(u);
  } else {
    const TablePair& t = tables(z1, z2);
    m1 = t.first.lookup(u);
    m2 = t.second.lookup(u);
  }

  if (forward && (m1.is_parent() || m2.is_parent())) {
    throw StateCorrupt("forward draw u = " + std::to_string(u) + " sent a walk to its parent");
  }
  const std::int64_t gap1_before = tree1_.depth(x1_) - y_;
  const std::int64_t gap2_before = tree2_.depth(x2_) - y_;

  x1_ = m1.is_parent() ? tree1_.parent(x1_) : tree1_.child(x1_, m1.child);
  x2_ = m2.is_parent() ? tree2_.parent(x2_) : tree2_.child(x2_, m2.child);
  if (x1_ == kNoVertex || x2_ == kNoVertex) throw StateCorrupt("walk left the tree at the root");
  y_ += forward ? 1 : -1;
  ++n_;

  const std::int32_t d1 = tree1_.depth(x1_);
  const std::int32_t d2 = tree2_.depth(x2_);
  const std::int64_t g1 = d1 - y_;
  const std::int64_t g2 = d2 - y_;
  if (g1 < 0 || g2 < 0 || (g1 & 1) || (g2 & 1) || g1 < gap1_before || g2 < gap2_before) {
    throw StateCorrupt("depth/backbone invariant broken at n = " + std::to_string(n_) +
                       ": depths " + std::to_string(d1) + "," + std::to_string(d2) +
                       " Y = " + std::to_string(y_));
  }

  last_ = {n_, u, forward ? BandClass::forward : BandClass::backward, m1, m2,
           static_cast<std::int8_t>(forward ? 1 : -1), d1, d2, y_};
  return last_;
}

BiasedWalk::BiasedWalk(ProgenyDistribution p, double beta) : p_(std::move(p)), beta_(beta) {
  if (!(beta_ > 0.0)) throw PreconditionError("beta must be > 0");
  reset();
}

void BiasedWalk::reset() {
  tree_.reset();
  x_ = Tree::root();
  n_ = 0;
}

const IntervalTable& BiasedWalk::table(int z, bool at_root) {
  auto& cache = at_root ? root_ : nonroot_;
  const auto idx = static_cast<std::size_t>(z);
  if (cache.size() <= idx) cache.resize(idx + 1);
  if (cache[idx].entries().empty()) cache[idx] = single_walk_table(z, beta_, at_root);
  return cache[idx];
}

std::int32_t BiasedWalk::step(Stream& rng) {
  if (!tree_.is_realized(x_)) tree_.realize_children(x_, p_.sample(rng));
  const int z = tree_.child_count(x_);
  const Destination m = table(z, x_ == Tree::root()).lookup(rng.uniform_open_closed());
  x_ = m.is_parent() ? tree_.parent(x_) : tree_.child(x_, m.child);
  ++n_;
  return tree_.depth(x_);
}

}  // namespace gwspeed
