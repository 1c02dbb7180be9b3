// Copyright (C) 2026 The adaflow Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <atomic>
#include <cstdint>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <utility>

#include "adaflow/error.hpp"
#include "adaflow/similarity.hpp"

namespace adaflow {

/// Memoizes heatmaps of a feature volume, keyed by the ordered pair (i, j) since H(i,j) and
/// H(j,i) differ. Least-recently-used entries are evicted beyond `capacity`. Lookups are safe
/// from multiple threads; two threads missing on the same key may both compute it, and the
/// results are identical.
class HeatmapCache {
public:
    static constexpr std::size_t kDefaultCapacity = 1 << 14;

    explicit HeatmapCache(const FeatureVolume& features, std::size_t capacity = kDefaultCapacity)
        : m_features(features), m_capacity(std::max<std::size_t>(capacity, 1)) {}

    HeatmapCache(const HeatmapCache&) = delete;
    HeatmapCache& operator=(const HeatmapCache&) = delete;

    const FeatureVolume& features() const noexcept { return m_features; }
    std::size_t capacity() const noexcept { return m_capacity; }

    std::shared_ptr<const Heatmap> lookup(std::size_t i, std::size_t j) {
        const std::size_t n = m_features.frames();
        if (i >= n || j >= n) {
            throw IndexError("heatmap lookup (" + std::to_string(i) + ", " + std::to_string(j) +
                             ") out of range for " + std::to_string(n) + " frames");
        }
        const std::uint64_t key = (static_cast<std::uint64_t>(i) << 32) | j;
        {
            std::lock_guard lock(m_mutex);
            if (auto it = m_entries.find(key); it != m_entries.end()) {
                m_lru.splice(m_lru.begin(), m_lru, it->second.position);
                return it->second.value;
            }
        }
        auto value = std::make_shared<const Heatmap>(heatmap(m_features, i, j));
        m_computations.fetch_add(1, std::memory_order_relaxed);

        std::lock_guard lock(m_mutex);
        if (auto it = m_entries.find(key); it != m_entries.end()) {
            return it->second.value;
        }
        m_lru.push_front(key);
        m_entries.emplace(key, Entry{value, m_lru.begin()});
        while (m_entries.size() > m_capacity) {
            m_entries.erase(m_lru.back());
            m_lru.pop_back();
        }
        return value;
    }

    /// Number of heatmaps computed so far (misses, including recomputation after eviction).
    std::size_t computations() const noexcept { return m_computations.load(std::memory_order_relaxed); }

    std::size_t size() const {
        std::lock_guard lock(m_mutex);
        return m_entries.size();
    }

private:
    struct Entry {
        std::shared_ptr<const Heatmap> value;
        std::list<std::uint64_t>::iterator position;
    };

    const FeatureVolume& m_features;
    std::size_t m_capacity;
    mutable std::mutex m_mutex;
    std::list<std::uint64_t> m_lru;
    std::unordered_map<std::uint64_t, Entry> m_entries;
    std::atomic<std::size_t> m_computations{0};
};

}  // namespace adaflow
