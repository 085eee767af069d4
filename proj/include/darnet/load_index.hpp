#pragma once

#include <bit>
#include <cstddef>
#include <vector>

namespace darnet
{
/*!
 * Fenwick tree of nonnegative integer weights.
 *
 * Supports point updates and weighted sampling (find the slot holding the
 * k-th unit of weight) in O(log n). Used to pick the departing call's link.
 */
class LoadIndex
{
  public:
    LoadIndex() = default;

    explicit LoadIndex(std::vector<long> const& weights)
        : tree_(weights.size() + 1, 0), size_(weights.size())
    {
        for (std::size_t i = 0; i < size_; ++i)
        {
            tree_[i + 1] += weights[i];
            std::size_t parent = (i + 1) + ((i + 1) & (~(i + 1) + 1));
            if (parent <= size_)
                tree_[parent] += tree_[i + 1];
            total_ += weights[i];
        }
    }

    long total() const { return total_; }

    void update(std::size_t slot, long delta)
    {
        total_ += delta;
        for (std::size_t i = slot + 1; i <= size_; i += i & (~i + 1))
            tree_[i] += delta;
    }

    //! Slot s with prefix(s) <= unit < prefix(s + 1), for unit in [0, total).
    std::size_t find(long unit) const
    {
        std::size_t pos = 0;
        for (std::size_t step = std::bit_floor(size_); step != 0; step >>= 1)
        {
            std::size_t next = pos + step;
            if (next <= size_ && tree_[next] <= unit)
            {
                pos = next;
                unit -= tree_[next];
            }
        }
        return pos;
    }

  private:
    std::vector<long> tree_;
    std::size_t size_ = 0;
    long total_ = 0;
};
}  // namespace darnet
