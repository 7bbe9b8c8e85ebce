#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "crossgan/error.hpp"
#include "crossgan/tensor.hpp"

namespace crossgan {

/// One named parameter array with its gradient accumulator.
/// Batch-norm running statistics are stored as non-trainable entries.
template <typename T>
struct Param {
  Tensor<T> value;
  Tensor<T> grad;
  bool trainable = true;
};

/// Ordered map from parameter name to parameter storage.
///
/// Entries are held by shared handle so that two names (or two containers)
/// can refer to one storage; this is how weight tying is expressed. Copying a
/// NetworkParams copies handles, not arrays. Use clone() for a deep copy.
template <typename T>
class NetworkParams {
 public:
  using Handle = std::shared_ptr<Param<T>>;

  NetworkParams() = default;
  explicit NetworkParams(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t seed) noexcept { seed_ = seed; }

  void add(const std::string& name, Tensor<T> value, bool trainable = true) {
    if (entries_.count(name)) {
      throw std::invalid_argument("duplicate parameter name: " + name);
    }
    auto p = std::make_shared<Param<T>>();
    p->grad = Tensor<T>(value.shape());
    p->value = std::move(value);
    p->trainable = trainable;
    entries_.emplace(name, std::move(p));
  }

  /// Inserts an existing storage handle under `name`.
  void add_handle(const std::string& name, Handle handle) {
    if (!entries_.emplace(name, std::move(handle)).second) {
      throw std::invalid_argument("duplicate parameter name: " + name);
    }
  }

  /// Points `name` at `handle`, replacing its current storage.
  void alias(const std::string& name, Handle handle) {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
    it->second = std::move(handle);
  }

  bool contains(const std::string& name) const { return entries_.count(name) > 0; }
  std::size_t size() const noexcept { return entries_.size(); }

  Param<T>& at(const std::string& name) { return *handle(name); }
  const Param<T>& at(const std::string& name) const { return *handle(name); }

  const Handle& handle(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ConfigError("unknown parameter: " + name);
    return it->second;
  }

  const std::map<std::string, Handle>& entries() const noexcept { return entries_; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(entries_.size());
    for (const auto& [name, _] : entries_) out.push_back(name);
    return out;
  }

  /// Names beginning with `prefix`.
  std::vector<std::string> names_with_prefix(std::string_view prefix) const {
    std::vector<std::string> out;
    for (const auto& [name, _] : entries_) {
      if (std::string_view(name).starts_with(prefix)) out.push_back(name);
    }
    return out;
  }

  /// Distinct trainable storages among names with any of the given prefixes,
  /// in name order, each keyed by the first name that refers to it. A tied
  /// storage appears once.
  std::vector<std::pair<std::string, Handle>> trainable_storage(
      const std::vector<std::string>& prefixes) const {
    std::vector<std::pair<std::string, Handle>> out;
    std::set<const Param<T>*> seen;
    for (const auto& [name, h] : entries_) {
      if (!h->trainable) continue;
      bool match = false;
      for (const auto& p : prefixes) match = match || std::string_view(name).starts_with(p);
      if (match && seen.insert(h.get()).second) out.emplace_back(name, h);
    }
    return out;
  }

  void zero_grad() {
    for (auto& [_, h] : entries_) h->grad.fill(T{0});
  }

  /// Copies every entry of `other` under `prefix + name`, sharing storage.
  void adopt(const std::string& prefix, const NetworkParams& other) {
    for (const auto& [name, h] : other.entries_) add_handle(prefix + name, h);
  }

  /// Entries under `prefix` with the prefix stripped; storage shared.
  NetworkParams view(const std::string& prefix) const {
    NetworkParams out(seed_);
    for (const auto& [name, h] : entries_) {
      if (std::string_view(name).starts_with(prefix)) {
        out.add_handle(name.substr(prefix.size()), h);
      }
    }
    return out;
  }

  /// Deep copy. Aliasing between entries is preserved in the copy.
  NetworkParams clone() const {
    NetworkParams out(seed_);
    std::unordered_map<const Param<T>*, Handle> copies;
    for (const auto& [name, h] : entries_) {
      auto it = copies.find(h.get());
      if (it == copies.end()) {
        it = copies.emplace(h.get(), std::make_shared<Param<T>>(*h)).first;
      }
      out.entries_.emplace(name, it->second);
    }
    return out;
  }

  /// Same parameter values in a different scalar type (aliasing preserved).
  template <typename U>
  NetworkParams<U> cast() const {
    NetworkParams<U> out(seed_);
    std::unordered_map<const Param<T>*, std::shared_ptr<Param<U>>> copies;
    for (const auto& [name, h] : entries_) {
      auto it = copies.find(h.get());
      if (it == copies.end()) {
        auto p = std::make_shared<Param<U>>();
        p->value = h->value.template cast<U>();
        p->grad = Tensor<U>(h->value.shape());
        p->trainable = h->trainable;
        it = copies.emplace(h.get(), std::move(p)).first;
      }
      out.add_handle(name, it->second);
    }
    return out;
  }

  /// True when the two names share one storage.
  bool aliased(const std::string& a, const std::string& b) const {
    return handle(a).get() == handle(b).get();
  }

 private:
  std::map<std::string, Handle> entries_;
  std::uint64_t seed_ = 0;
};

/// Two parameter sets with a subset of entries sharing storage.
template <typename T>
struct CoupledParams {
  NetworkParams<T> first;
  NetworkParams<T> second;
  std::vector<std::string> tied;
};

/// Aliases every entry of `tie_list` in `b` to the storage of the same entry
/// in `a`. Names in the tie list that match a prefix of an entry (a block
/// name such as "up1.") tie all entries under it.
template <typename T>
CoupledParams<T> tie_parameters(const NetworkParams<T>& a, const NetworkParams<T>& b,
                                const std::vector<std::string>& tie_list) {
  CoupledParams<T> out{a, b, {}};
  for (const auto& item : tie_list) {
    std::vector<std::string> names;
    if (a.contains(item)) {
      names.push_back(item);
    } else {
      names = a.names_with_prefix(item);
    }
    if (names.empty()) throw ConfigError("tie list entry matches no parameter: " + item);
    for (const auto& name : names) {
      if (!b.contains(name)) {
        throw ConfigError("tied parameter missing from second network: " + name);
      }
      if (a.at(name).value.shape() != b.at(name).value.shape()) {
        throw ConfigError("tied parameter shape mismatch for " + name + ": " +
                          shape_to_string(a.at(name).value.shape()) + " vs " +
                          shape_to_string(b.at(name).value.shape()));
      }
      out.second.alias(name, a.handle(name));
      out.tied.push_back(name);
    }
  }
  return out;
}

}  // namespace crossgan
