#pragma once

#include <cstddef>
#include <deque>
#include <string>
#include <vector>

#include "dacl/geometry.hpp"

namespace dacl {

// Fixed-capacity FIFO of (embedding, density) pairs for one class. Entries
// keep the density stamped at push time; it is never recomputed.
class ClassMemoryBank {
public:
    ClassMemoryBank(int class_id, std::size_t capacity);

    // Appends in seq_id order, evicting the oldest entries beyond capacity.
    // Every item must carry this bank's class_id and a density value.
    void push(std::vector<ClassEmbedding> items);

    // Immutable copy in insertion order (oldest first).
    std::vector<ClassEmbedding> snapshot() const;

    int class_id() const { return class_id_; }
    std::size_t capacity() const { return capacity_; }
    std::size_t size() const { return ring_.size(); }

private:
    int class_id_;
    std::size_t capacity_;
    std::deque<ClassEmbedding> ring_;
};

struct BankSet {
    std::vector<ClassMemoryBank> banks;  // index == class_id, one per class
};

BankSet make_bank_set(int n_classes, std::size_t capacity);

// Density-estimation pool G_n ∪ V: bank snapshot followed by the batch
// embeddings. Batch items keep origin=Batch; nothing is deduplicated.
std::vector<ClassEmbedding> union_pool(const std::vector<ClassEmbedding>& bank_snapshot,
                                       const std::vector<ClassEmbedding>& batch);

// Flat binary persistence, header "DACLBANK".
void save_banks(const BankSet& banks, std::size_t d_proj, const std::string& path);
BankSet load_banks(const std::string& path);

}  // namespace dacl
