#include "agenum/ecs.hpp"

#include <algorithm>

namespace agenum {

NodeStore::NodeStore() { nodes_.push_back({NodeKind::kBottom, 0, 0, 0}); }

NodeId NodeStore::add(Node n) {
  nodes_.push_back(n);
  return nodes_.size() - 1;
}

SetHandle NodeStore::make_singleton(OutputLetter letter) {
  return {add({NodeKind::kSingleton, letter.position, letter.annotation, 0}),
          false};
}

NodeId NodeStore::union_nodes(NodeId a, NodeId b) {
  if (a == kBottom) return b;
  if (b == kBottom) return a;
  if (nodes_[a].is_exit()) return add({NodeKind::kUnion2, a, b, 0});
  if (nodes_[b].is_exit()) return add({NodeKind::kUnion2, b, a, 0});
  // Both are Union2 nodes (handles never point at Union3).
  Node n1 = nodes_[a];
  Node n2 = nodes_[b];
  NodeId inner = add({NodeKind::kUnion3, n2.a, n1.b, n2.b});
  return add({NodeKind::kUnion2, n1.a, inner, 0});
}

NodeId NodeStore::product_nodes(NodeId a, NodeId b) {
  if (a == kBottom || b == kBottom) return kBottom;
  return add({NodeKind::kProduct, a, b, 0});
}

SetHandle NodeStore::make_union(SetHandle a, SetHandle b) {
  return {union_nodes(a.node, b.node), a.has_eps || b.has_eps};
}

SetHandle NodeStore::make_product(SetHandle a, SetHandle b) {
  // S1·S2 = (S1∖ε)(S2∖ε) ∪ [ε∈S1](S2∖ε) ∪ [ε∈S2](S1∖ε) ∪ [ε∈S1∧ε∈S2]{ε}
  NodeId e = product_nodes(a.node, b.node);
  if (a.has_eps) e = union_nodes(e, b.node);
  if (b.has_eps) e = union_nodes(e, a.node);
  return {e, a.has_eps && b.has_eps};
}

std::string NodeStore::dump() const {
  std::string out;
  for (size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    out += std::to_string(i);
    switch (n.kind) {
      case NodeKind::kBottom:
        out += " BOTTOM";
        break;
      case NodeKind::kSingleton:
        out += " SINGLETON " + std::to_string(n.a) + " " + std::to_string(n.b);
        break;
      case NodeKind::kProduct:
        out += " PRODUCT " + std::to_string(n.a) + " " + std::to_string(n.b);
        break;
      case NodeKind::kUnion2:
        out += " UNION2 " + std::to_string(n.a) + " " + std::to_string(n.b);
        break;
      case NodeKind::kUnion3:
        out += " UNION3 " + std::to_string(n.a) + " " + std::to_string(n.b) +
               " " + std::to_string(n.c);
        break;
    }
    out += "\n";
  }
  return out;
}

void ExitIterator::reset(const NodeStore* store, NodeId root) {
  store_ = store;
  stack_.clear();
  if (root != kBottom) stack_.push_back(root);
}

NodeId ExitIterator::next() {
  while (!stack_.empty()) {
    NodeId id = stack_.back();
    stack_.pop_back();
    ++pops_;
    // Ids past the arena are the enumerator's virtual root and sentinel.
    if (id >= store_->node_count()) return id;
    const Node& n = store_->node(id);
    switch (n.kind) {
      case NodeKind::kSingleton:
      case NodeKind::kProduct:
        return id;
      case NodeKind::kUnion2:
        stack_.push_back(n.b);
        stack_.push_back(n.a);
        break;
      case NodeKind::kUnion3:
        stack_.push_back(n.c);
        stack_.push_back(n.b);
        stack_.push_back(n.a);
        break;
      case NodeKind::kBottom:
        break;
    }
  }
  return kBottom;
}

SetEnumerator::SetEnumerator(const NodeStore& store, SetHandle handle)
    : store_(store), handle_(handle) {
  root_node_ = {NodeKind::kProduct, handle.node, kSentinel, 0};
  sentinel_node_ = {NodeKind::kSingleton, 0, 0, 0};
  eps_pending_ = handle.has_eps;
}

const Node& SetEnumerator::dag(NodeId id) const {
  if (id == kRoot) return root_node_;
  if (id == kSentinel) return sentinel_node_;
  return store_.node(id);
}

uint32_t SetEnumerator::alloc(NodeId d) {
  ++steps_;
  uint32_t t;
  if (!garbage_.empty()) {
    // Recycle lazily: a reused node hands its children to the garbage list,
    // so every allocation stays constant time.
    t = garbage_.back();
    garbage_.pop_back();
    if (pool_[t].concat) {
      garbage_.push_back(pool_[t].left);
      garbage_.push_back(pool_[t].right);
    }
  } else {
    t = pool_.size();
    pool_.emplace_back();
  }
  TreeNode& n = pool_[t];
  n.dag = d;
  n.concat = false;
  n.has_next = false;
  return t;
}

void SetEnumerator::release(uint32_t t) { garbage_.push_back(t); }

NodeId SetEnumerator::take_exit(ExitIterator* it) {
  uint64_t before = it->pops();
  NodeId id = it->next();
  uint64_t pops = it->pops() - before;
  steps_ += pops;
  max_pops_per_exit_ = std::max<size_t>(max_pops_per_exit_, pops);
  return id;
}

void SetEnumerator::reset_iterator(ExitIterator* it, NodeId root) {
  ++steps_;
  it->reset(&store_, root);
}

void SetEnumerator::refresh(uint32_t t) {
  TreeNode& n = pool_[t];
  n.has_next = n.concat &&
               (pool_[n.left].has_next || n.exits1.has_next() ||
                pool_[n.right].has_next || n.exits2.has_next());
}

void SetEnumerator::unfold(uint32_t t) {
  std::vector<std::pair<uint32_t, bool>> stack{{t, false}};
  while (!stack.empty()) {
    auto [u, visited] = stack.back();
    stack.pop_back();
    ++steps_;
    if (visited) {
      refresh(u);
      continue;
    }
    const Node& d = dag(pool_[u].dag);
    if (d.kind != NodeKind::kProduct) {
      pool_[u].concat = false;
      pool_[u].has_next = false;
      continue;
    }
    pool_[u].concat = true;
    reset_iterator(&pool_[u].exits1, d.a);
    NodeId e1 = take_exit(&pool_[u].exits1);
    uint32_t l = alloc(e1);
    pool_[u].left = l;
    reset_iterator(&pool_[u].exits2, d.b);
    NodeId e2 = take_exit(&pool_[u].exits2);
    uint32_t r = alloc(e2);
    pool_[u].right = r;
    stack.push_back({u, true});
    stack.push_back({r, false});
    stack.push_back({l, false});
  }
}

void SetEnumerator::advance(uint32_t t) {
  // Walk down to the node whose state changes, remembering which ancestors
  // must restart their left factor.
  struct Step {
    uint32_t node;
    bool restart_left;
  };
  std::vector<Step> path;
  uint32_t u = t;
  for (;;) {
    ++steps_;
    TreeNode& n = pool_[u];
    if (pool_[n.left].has_next) {
      path.push_back({u, false});
      u = n.left;
      continue;
    }
    if (n.exits1.has_next()) {
      path.push_back({u, false});
      release(n.left);
      NodeId e = take_exit(&pool_[u].exits1);
      uint32_t l = alloc(e);
      pool_[u].left = l;
      unfold(l);
      break;
    }
    path.push_back({u, true});
    if (pool_[n.right].has_next) {
      u = n.right;
      continue;
    }
    release(n.right);
    NodeId e = take_exit(&pool_[u].exits2);
    uint32_t r = alloc(e);
    pool_[u].right = r;
    unfold(r);
    break;
  }
  for (size_t i = path.size(); i-- > 0;) {
    uint32_t v = path[i].node;
    if (path[i].restart_left) {
      release(pool_[v].left);
      reset_iterator(&pool_[v].exits1, dag(pool_[v].dag).a);
      NodeId e = take_exit(&pool_[v].exits1);
      uint32_t l = alloc(e);
      pool_[v].left = l;
      unfold(l);
    }
    refresh(v);
  }
}

void SetEnumerator::collect(uint32_t t, Output* out) {
  std::vector<uint32_t> stack{t};
  while (!stack.empty()) {
    uint32_t u = stack.back();
    stack.pop_back();
    ++steps_;
    const TreeNode& n = pool_[u];
    if (n.concat) {
      stack.push_back(n.right);
      stack.push_back(n.left);
    } else if (n.dag != kSentinel) {
      const Node& d = dag(n.dag);
      out->push_back({d.a, d.b});
    }
  }
}

bool SetEnumerator::next(Output* out) {
  out->clear();
  if (done_) return false;
  if (eps_pending_) {
    eps_pending_ = false;
    ++steps_;
    return true;
  }
  if (handle_.node == kBottom) {
    done_ = true;
    return false;
  }
  if (!started_) {
    started_ = true;
    root_ = alloc(kRoot);
    unfold(root_);
  } else {
    if (!pool_[root_].has_next) {
      done_ = true;
      return false;
    }
    advance(root_);
  }
  collect(root_, out);
  return true;
}

size_t SetEnumerator::working_memory() const {
  size_t total = pool_.size();
  for (const TreeNode& n : pool_)
    total += n.exits1.stack_size() + n.exits2.stack_size();
  return total;
}

}  // namespace agenum
