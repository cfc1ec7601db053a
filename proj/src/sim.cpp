#include "macsim/sim.hpp"

#include <stdexcept>

#include "macsim/mac_preamble.hpp"
#include "macsim/mac_sync.hpp"

namespace macsim {

namespace {

std::unique_ptr<MacProtocol> make_protocol(const std::string& name,
                                           MacContext ctx) {
  if (name == "smac") return std::make_unique<SmacProtocol>(ctx);
  if (name == "tmac") return std::make_unique<TmacProtocol>(ctx);
  if (name == "dmac") return std::make_unique<DmacProtocol>(ctx);
  if (name == "bmac") return std::make_unique<BmacProtocol>(ctx);
  if (name == "bmac+") return std::make_unique<BmacPlusProtocol>(ctx);
  if (name == "xmac") return std::make_unique<XmacProtocol>(ctx);
  if (name == "wisemac") return std::make_unique<WisemacProtocol>(ctx);
  throw std::invalid_argument("unknown protocol: " + name);
}

}  // namespace

bool protocol_known(const std::string& name) {
  return name == "smac" || name == "tmac" || name == "dmac" || name == "bmac" ||
         name == "bmac+" || name == "xmac" || name == "wisemac";
}

Simulation::Simulation(SimConfig cfg)
    : cfg_(std::move(cfg)),
      topo_(build_grid(cfg_.rows, cfg_.cols, cfg_.spacing, cfg_.range)),
      tree_(build_gathering_tree(topo_, cfg_.root)),
      ledger_(topo_.node_count(), cfg_.power),
      channel_(sched_, topo_, ledger_),
      rng_(cfg_.seed) {
  if (!protocol_known(cfg_.protocol))
    throw std::invalid_argument("unknown protocol: " + cfg_.protocol);
  if (cfg_.protocol == "dmac" &&
      cfg_.traffic.pattern == TrafficPattern::LOCAL_GOSSIP)
    throw std::invalid_argument(
        "dmac supports converge-cast only; local gossip is not applicable");
  // interarrival == 0 means "no traffic": the MACs still duty-cycle, which
  // is exactly what the idle-energy baseline measures.

  const double theta = cfg_.params.theta_ppm * 1e-6;
  macs_.reserve(topo_.node_count());
  for (NodeId n = 0; n < topo_.node_count(); ++n) {
    channel_.set_drift(n, rng_.stream(n, "drift").symmetric_unit() * theta);
    MacContext ctx;
    ctx.id = n;
    ctx.sched = &sched_;
    ctx.channel = &channel_;
    ctx.rng = &rng_;
    ctx.params = &cfg_.params;
    ctx.app = this;
    ctx.tree = &tree_;
    macs_.push_back(make_protocol(cfg_.protocol, ctx));
    channel_.set_sink(n, macs_.back().get());
  }
}

void Simulation::boot_all() {
  for (auto& m : macs_) m->on_boot();
}

void Simulation::schedule_origination(NodeId node) {
  const Tick gap = rng_.stream(node, "traffic").exponential(cfg_.traffic.interarrival);
  if (sched_.now() + gap >= cfg_.duration) return;
  sched_.schedule_in(gap, [this, node]() { originate(node); });
}

void Simulation::originate(NodeId node) {
  NodeId hop_dst, final_dst;
  if (cfg_.traffic.pattern == TrafficPattern::CONVERGECAST) {
    hop_dst = tree_.parent[node];
    final_dst = tree_.root;
  } else {
    const auto& nbrs = topo_.neighbors(node);
    if (nbrs.empty()) {
      schedule_origination(node);
      return;
    }
    hop_dst = nbrs[rng_.stream(node, "gossip").draw(nbrs.size())];
    final_dst = hop_dst;
  }
  payloads_.push_back(Payload{node, final_dst, sched_.now(), false, false});
  const std::uint64_t id = payloads_.size();  // ids start at 1
  if (macs_[node]->on_send_request(hop_dst, id) == EnqueueResult::DROPPED_FULL) {
    payloads_.back().dropped = true;
    dropped_++;
  }
  schedule_origination(node);
}

void Simulation::on_app_delivery(NodeId at, NodeId src, std::uint64_t payload_id) {
  if (payload_id == 0 || payload_id > payloads_.size()) return;
  Payload& pl = payloads_[payload_id - 1];
  if (pl.delivered) return;
  const std::uint64_t key = (payload_id << 32) | at;
  if (!seen_.insert(key).second) return;  // MAC-level duplicate
  if (at == pl.final_dst) {
    if (pl.dropped) {
      // A hop gave up (lost ACK) but the copy got through anyway.
      pl.dropped = false;
      dropped_--;
    }
    pl.delivered = true;
    delivered_++;
    latency_sum_ms_ += to_ms(sched_.now() - pl.created);
    return;
  }
  if (cfg_.traffic.pattern == TrafficPattern::CONVERGECAST) {
    // Hop-by-hop application forwarding along the gathering tree.
    if (macs_[at]->on_send_request(tree_.parent[at], payload_id) ==
        EnqueueResult::DROPPED_FULL) {
      if (!pl.dropped) {
        pl.dropped = true;
        dropped_++;
      }
    }
  }
}

void Simulation::on_payload_failed(NodeId at, std::uint64_t payload_id) {
  if (payload_id == 0 || payload_id > payloads_.size()) return;
  Payload& pl = payloads_[payload_id - 1];
  if (!pl.delivered && !pl.dropped) {
    pl.dropped = true;
    dropped_++;
  }
}

SimResult Simulation::run() {
  boot_all();
  for (NodeId n = 0; n < topo_.node_count(); ++n) {
    const bool sources = cfg_.traffic.pattern == TrafficPattern::LOCAL_GOSSIP ||
                         n != tree_.root;
    if (sources && cfg_.traffic.interarrival > 0) schedule_origination(n);
  }
  sched_.run_until(cfg_.duration);
  ledger_.flush(cfg_.duration);

  SimResult r;
  r.originated = payloads_.size();
  r.delivered = delivered_;
  r.dropped = dropped_;
  r.delivery_ratio =
      r.originated == 0
          ? 1.0
          : static_cast<double>(delivered_) / static_cast<double>(r.originated);
  r.avg_node_energy_mj = ledger_.fleet_average_mj();
  r.total_energy_mj = ledger_.fleet_total_mj();
  r.avg_latency_ms = delivered_ == 0 ? 0.0 : latency_sum_ms_ / delivered_;
  return r;
}

}  // namespace macsim
