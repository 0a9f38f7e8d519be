// Copyright 2026 The qsim authors.
//
// This source code is licensed under the Apache License, Version 2.0 found in
// the LICENSE file in the root directory of this source tree.

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsim/common.hpp"

namespace qsim {

struct Segment {
    std::string name;
    int width;
};

/// Ordered named register segments over a dense amplitude array.
///
/// Qubit 0 is the most significant bit of the amplitude index, so a layout
/// {a:2, b:1} indexes basis states as |a1 a0 b0> with `a` in the high bits.
class RegisterLayout {
  public:
    RegisterLayout() : total_(0) {}

    explicit RegisterLayout(std::vector<Segment> segments, int budget = max_qubits())
        : segs_(std::move(segments)) {
        total_ = 0;
        for (const auto& s : segs_) {
            if (s.width < 1) throw Error("RegisterLayout: segment '" + s.name + "' has width < 1");
            for (const auto& o : segs_)
                if (&o != &s && o.name == s.name)
                    throw Error("RegisterLayout: duplicate segment name '" + s.name + "'");
            total_ += s.width;
        }
        if (total_ < 1) throw Error("RegisterLayout: empty layout");
        if (total_ > budget)
            throw BudgetError("RegisterLayout: " + std::to_string(total_) +
                              " qubits exceed budget of " + std::to_string(budget));
    }

    RegisterLayout(std::initializer_list<Segment> segments)
        : RegisterLayout(std::vector<Segment>(segments)) {}

    int total_qubits() const { return total_; }
    std::uint64_t dim() const { return std::uint64_t(1) << total_; }
    const std::vector<Segment>& segments() const { return segs_; }

    int segment_index(const std::string& name) const {
        for (std::size_t i = 0; i < segs_.size(); ++i)
            if (segs_[i].name == name) return static_cast<int>(i);
        throw Error("RegisterLayout: no segment named '" + name + "'");
    }

    int width(const std::string& name) const { return segs_[segment_index(name)].width; }

    /// Qubit offset of the segment's first (most significant) qubit.
    int offset(const std::string& name) const {
        int off = 0;
        for (const auto& s : segs_) {
            if (s.name == name) return off;
            off += s.width;
        }
        throw Error("RegisterLayout: no segment named '" + name + "'");
    }

    /// Right-shift that brings the segment's value to the low bits of an index.
    int shift(const std::string& name) const {
        return total_ - offset(name) - width(name);
    }

    std::uint64_t mask(const std::string& name) const {
        const int w = width(name);
        return ((std::uint64_t(1) << w) - 1) << shift(name);
    }

    std::uint64_t value(std::uint64_t index, const std::string& name) const {
        const int w = width(name);
        return (index >> shift(name)) & ((std::uint64_t(1) << w) - 1);
    }

    /// Bit position (from the LSB of the index) of qubit `bit` within `name`,
    /// where bit 0 is the segment's most significant qubit.
    int bit_position(const std::string& name, int bit) const {
        const int w = width(name);
        if (bit < 0 || bit >= w) throw Error("RegisterLayout: bit out of range in '" + name + "'");
        return total_ - 1 - (offset(name) + bit);
    }

    bool operator==(const RegisterLayout& rhs) const {
        if (segs_.size() != rhs.segs_.size()) return false;
        for (std::size_t i = 0; i < segs_.size(); ++i)
            if (segs_[i].name != rhs.segs_[i].name || segs_[i].width != rhs.segs_[i].width)
                return false;
        return true;
    }
    bool operator!=(const RegisterLayout& rhs) const { return !(*this == rhs); }

  private:
    std::vector<Segment> segs_;
    int total_;
};

}  // namespace qsim
