#include "moonstack/stack/node.hpp"

namespace moonstack::stack {

bool Node::wants(std::string_view t) const {
  if (patterns_.empty()) patterns_ = subscriptions();
  for (const auto& p : patterns_)
    if (bus::topic_matches(p, t)) return true;
  return false;
}

}  // namespace moonstack::stack
