#include "bus/bus.hpp"

#include <algorithm>
#include <cassert>

namespace mpsoc::bus {

namespace {

void fail(Transaction& txn, Status s) {
  txn.status = s;
  if (txn.kind == Kind::read) txn.payload.fill(0);
}

}  // namespace

void perform_access(const MemoryMap& map, Transaction& txn, Status unmapped_status) {
  txn.status = Status::ok;
  if (!well_formed(txn)) return fail(txn, Status::bus_error);
  const auto hit = map.decode(txn.address);
  if (!hit) return fail(txn, unmapped_status);
  if (std::uint64_t{txn.address} + txn.width > hit->entry->region.end() || hit->entry->target == nullptr) {
    return fail(txn, Status::bus_error);
  }
  hit->entry->target->access(txn, hit->offset);
  if (txn.status != Status::ok && txn.kind == Kind::read) txn.payload.fill(0);
}

// ---------------------------------------------------------------------------

TlmBus::TlmBus(sim::Kernel& kernel, const MemoryMap& map, ArbiterConfig cfg, sim::SimTime clock_period_ns)
    : kernel_(kernel), map_(map), cfg_(std::move(cfg)), period_(clock_period_ns) {}

void TlmBus::transport(Transaction& txn) {
  sim::RegionScope scope(kernel_, sim::Region::bus);
  if (owner_) {
    const auto start = kernel_.now();
    waiters_.push_back({txn.master_id, *kernel_.current()});
    while (owner_ != txn.master_id) kernel_.block();
    stall_ns_ += kernel_.now() - start;
    stats_.stall_cycles = stall_ns_ / period_;
  } else {
    owner_ = txn.master_id;
  }

  perform_access(map_, txn, Status::bus_error);
  stats_.count(txn.master_id);
  if (txn.status == Status::bus_error) ++stats_.bus_errors;

  owner_.reset();
  if (!waiters_.empty()) {
    // Lowest rank first; ties cannot occur because ranks are unique, and
    // stable ordering keeps arrival order for unknown masters.
    auto best = std::min_element(waiters_.begin(), waiters_.end(), [this](const Waiter& a, const Waiter& b) {
      return cfg_.rank(a.master) < cfg_.rank(b.master);
    });
    owner_ = best->master;
    const auto h = best->process;
    waiters_.erase(best);
    kernel_.wake(h);
  }
}

// ---------------------------------------------------------------------------

CycleBus::CycleBus(sim::Kernel& kernel, const MemoryMap& map, ArbiterConfig cfg, sim::SimTime clock_period_ns)
    : kernel_(kernel), map_(map), cfg_(std::move(cfg)), period_(clock_period_ns) {}

void CycleBus::transport(Transaction& txn) {
  sim::RegionScope scope(kernel_, sim::Region::bus);
  const unsigned me = txn.master_id;
  const sim::SimTime deadline = kernel_.now() + cfg_.timeout_cycles * period_;
  requests_.push_back(me);

  for (;;) {
    // Every master active on this edge asserts its request before the
    // first one to resume arbitrates.
    kernel_.wait(0);
    if (!owner_ && arbitrated_at_ != kernel_.now()) {
      arbitrated_at_ = kernel_.now();
      owner_ = arbitrate_cycle(requests_, cfg_);
    }
    if (owner_ == me) break;
    ++stats_.stall_cycles;
    kernel_.wait(period_);
    if (kernel_.now() >= deadline) {
      requests_.erase(std::find(requests_.begin(), requests_.end(), me));
      fail(txn, Status::timeout);
      ++stats_.timeouts;
      stats_.count(me);
      return;
    }
  }

  requests_.erase(std::find(requests_.begin(), requests_.end(), me));
  assert(!in_transfer_);
  in_transfer_ = true;
  max_concurrent_ = std::max(max_concurrent_, ++active_transfers_);

  const auto hit = map_.decode(txn.address);
  if (!hit) {
    // No slave acknowledges: the bus stays held until the arbiter gives up.
    fail(txn, Status::timeout);
    ++stats_.timeouts;
    while (kernel_.now() < deadline) kernel_.wait(period_);
  } else {
    perform_access(map_, txn, Status::timeout);
    if (txn.status == Status::bus_error) ++stats_.bus_errors;
    const unsigned cycles = 1 + (hit->entry->target != nullptr ? hit->entry->target->access_cycles() : 0);
    for (unsigned i = 0; i < cycles; ++i) kernel_.wait(period_);
  }
  stats_.count(me);

  --active_transfers_;
  in_transfer_ = false;
  owner_.reset();
}

}  // namespace mpsoc::bus
