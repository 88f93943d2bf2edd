#include "mssr/context.hpp"

#include <sstream>
#include <stdexcept>

#include "mssr/printer.hpp"

namespace mssr {

std::string ChannelKey::to_string() const {
  switch (kind) {
    case Kind::Var:
      return name;
    case Kind::SessionRole:
      return name + "[" + role.name + "]";
    case Kind::SessionDomain:
      return name + "[" + domain.to_string() + "]";
  }
  return "?";
}

LocalPtr ChannelContext::get(const ChannelKey& k) const {
  auto it = entries.find(k);
  if (it == entries.end())
    throw std::out_of_range("no context entry for " + k.to_string());
  return it->second;
}

bool ChannelContext::all_end() const {
  for (const auto& [k, t] : entries)
    if (t->kind != LocalType::Kind::End) return false;
  return true;
}

std::string ChannelContext::to_string() const {
  std::ostringstream out;
  bool first = true;
  for (const auto& [k, t] : entries) {
    if (!first) out << ", ";
    first = false;
    out << k.to_string() << ": " << pretty(t);
  }
  return first ? "(empty)" : out.str();
}

std::string ChannelContext::encode_canonical() const {
  std::string out;
  for (const auto& [k, t] : entries) {
    out += k.to_string();
    out += "=";
    out += encode(canon(t));
    out += ";";
  }
  return out;
}

std::optional<ChannelContext> ChannelContext::disjoint_union(const ChannelContext& a,
                                                             const ChannelContext& b) {
  ChannelContext out = a;
  for (const auto& [k, t] : b.entries) {
    if (out.has(k)) return std::nullopt;
    out.set(k, t);
  }
  return out;
}

std::string TypeAction::to_string() const {
  switch (kind) {
    case Kind::Output: {
      std::string s = subject_domain ? subject_domain->to_string() : subject_role->name;
      return s + ":" + partner.name + "+" + label + "(" + pretty(payload) + ")";
    }
    case Kind::Input:
      return subject_role->name + ":" + partner.name + "&" + label + "(" + pretty(payload) + ")";
    case Kind::Comm:
      return sender.name + " -> " + receiver.name + ": " + label + "(" + pretty(payload) + ")";
  }
  return "?";
}

} // namespace mssr
