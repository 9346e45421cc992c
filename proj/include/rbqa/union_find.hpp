#pragma once

#include "rbqa/model.hpp"

#include <map>

namespace rbqa {

// Union-find over domain values, used for FD merges. Class representatives
// prefer constants over frozen values over nulls; within a kind the lower id
// wins, so canonical forms are stable. Merging two distinct constants is a
// conflict and leaves the structure unchanged.
class ValueUnionFind {
public:
    Value find(Value v) const;

    struct MergeResult {
        bool merged = false;   // false when already equal or on conflict
        bool conflict = false; // two distinct constants
        Value rep{Value::null(0)};
    };

    MergeResult merge(Value a, Value b);

    bool same(Value a, Value b) const { return find(a) == find(b); }
    Tuple map(const Tuple& t) const;
    bool empty() const { return parent_.empty(); }
    const std::map<Value, Value>& raw_links() const { return parent_; }

private:
    mutable std::map<Value, Value> parent_;
};

// True when a should represent the merged class of {a, b}.
bool prefer_as_representative(Value a, Value b);

} // namespace rbqa
