// One round's worth of delivered messages at a node. Exact duplicates from
// the same sender are discarded; a sender may still contribute several
// distinct payloads per round.

#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "idbft/types.hpp"

namespace idbft {

class RoundInbox {
public:
    // Returns false when the identical (sender, payload) pair was already present.
    bool add(NodeId sender, const Payload& p) {
        auto& list = by_sender_[sender];
        if (std::find(list.begin(), list.end(), p) != list.end()) return false;
        list.push_back(p);
        return true;
    }

    void merge(const RoundInbox& other) {
        for (const auto& [sender, list] : other.by_sender_) {
            for (const Payload& p : list) add(sender, p);
        }
    }

    bool contains_sender(NodeId sender) const { return by_sender_.count(sender) > 0; }

    bool empty() const { return by_sender_.empty(); }

    std::set<NodeId> senders() const {
        std::set<NodeId> out;
        for (const auto& [sender, list] : by_sender_) out.insert(sender);
        return out;
    }

    const std::vector<Payload>* from(NodeId sender) const {
        auto it = by_sender_.find(sender);
        return it == by_sender_.end() ? nullptr : &it->second;
    }

    template <class Fn>  // Fn(NodeId, const Payload&)
    void for_each(Fn fn) const {
        for (const auto& [sender, list] : by_sender_) {
            for (const Payload& p : list) fn(sender, p);
        }
    }

    // Number of distinct senders that delivered exactly this payload.
    int count_exact(const Payload& p) const {
        int n = 0;
        for (const auto& [sender, list] : by_sender_) {
            if (std::find(list.begin(), list.end(), p) != list.end()) ++n;
        }
        return n;
    }

    // Per-value sender counts for payloads of the given kind and instance tag.
    std::map<Value, int> value_counts(MsgKind kind,
                                      std::optional<InstanceId> instance = {}) const {
        std::map<Value, int> counts;
        for (const auto& [sender, list] : by_sender_) {
            for (const Payload& p : list) {
                if (p.kind == kind && p.instance == instance) ++counts[p.value];
            }
        }
        return counts;
    }

    // Senders that delivered at least one payload satisfying pred.
    std::set<NodeId> senders_of(const std::function<bool(const Payload&)>& pred) const {
        std::set<NodeId> out;
        for (const auto& [sender, list] : by_sender_) {
            for (const Payload& p : list) {
                if (pred(p)) {
                    out.insert(sender);
                    break;
                }
            }
        }
        return out;
    }

    RoundInbox filtered(const std::function<bool(NodeId, const Payload&)>& keep) const {
        RoundInbox out;
        for (const auto& [sender, list] : by_sender_) {
            for (const Payload& p : list) {
                if (keep(sender, p)) out.by_sender_[sender].push_back(p);
            }
        }
        return out;
    }

    std::size_t total_payloads() const {
        std::size_t n = 0;
        for (const auto& [sender, list] : by_sender_) n += list.size();
        return n;
    }

private:
    std::map<NodeId, std::vector<Payload>> by_sender_;
};

}  // namespace idbft
