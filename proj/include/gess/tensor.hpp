#pragma once

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace gess {

/// Dense row-major n-dimensional array. Every extent is >= 1 and the
/// element count always equals the product of the extents.
template <typename T>
class BasicTensor {
public:
    using value_type = T;

    BasicTensor() = default;

    explicit BasicTensor(std::vector<std::size_t> dims, T fill = T{})
        : dims_(std::move(dims)) {
        data_.assign(checked_count(dims_), fill);
    }

    BasicTensor(std::vector<std::size_t> dims, std::vector<T> data)
        : dims_(std::move(dims)), data_(std::move(data)) {
        if (data_.size() != checked_count(dims_)) {
            throw std::invalid_argument("tensor: data length " + std::to_string(data_.size()) +
                                        " does not match dims product " +
                                        std::to_string(checked_count(dims_)));
        }
    }

    [[nodiscard]] const std::vector<std::size_t>& dims() const noexcept { return dims_; }
    [[nodiscard]] std::size_t rank() const noexcept { return dims_.size(); }
    [[nodiscard]] std::size_t dim(std::size_t axis) const { return dims_.at(axis); }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] bool empty() const noexcept { return data_.empty(); }

    [[nodiscard]] std::span<T> data() noexcept { return data_; }
    [[nodiscard]] std::span<const T> data() const noexcept { return data_; }
    [[nodiscard]] const std::vector<T>& values() const noexcept { return data_; }

    T& operator[](std::size_t i) { return data_[i]; }
    const T& operator[](std::size_t i) const { return data_[i]; }

    // Rank-specific accessors; no bounds checks beyond what the caller guarantees.
    T& at(std::size_t i, std::size_t j) { return data_[i * dims_[1] + j]; }
    const T& at(std::size_t i, std::size_t j) const { return data_[i * dims_[1] + j]; }
    T& at(std::size_t c, std::size_t y, std::size_t x) {
        return data_[(c * dims_[1] + y) * dims_[2] + x];
    }
    const T& at(std::size_t c, std::size_t y, std::size_t x) const {
        return data_[(c * dims_[1] + y) * dims_[2] + x];
    }
    T& at(std::size_t o, std::size_t c, std::size_t y, std::size_t x) {
        return data_[((o * dims_[1] + c) * dims_[2] + y) * dims_[3] + x];
    }
    const T& at(std::size_t o, std::size_t c, std::size_t y, std::size_t x) const {
        return data_[((o * dims_[1] + c) * dims_[2] + y) * dims_[3] + x];
    }

    [[nodiscard]] BasicTensor reshaped(std::vector<std::size_t> dims) const {
        return BasicTensor(std::move(dims), data_);
    }

    template <typename U>
    [[nodiscard]] BasicTensor<U> cast() const {
        std::vector<U> out(data_.begin(), data_.end());
        return BasicTensor<U>(dims_, std::move(out));
    }

    friend bool operator==(const BasicTensor&, const BasicTensor&) = default;

    static std::size_t checked_count(const std::vector<std::size_t>& dims) {
        if (dims.empty()) {
            throw std::invalid_argument("tensor: at least one dimension required");
        }
        std::size_t n = 1;
        for (std::size_t i = 0; i < dims.size(); ++i) {
            if (dims[i] == 0) {
                throw std::invalid_argument("tensor: dimension " + std::to_string(i) + " is zero");
            }
            n *= dims[i];
        }
        return n;
    }

private:
    std::vector<std::size_t> dims_;
    std::vector<T> data_;
};

/// Storage precision for maps and parameters.
using Tensor = BasicTensor<float>;
/// Accumulation precision for losses, gradients and oracles.
using Tensor64 = BasicTensor<double>;

std::string shape_string(const std::vector<std::size_t>& dims);

}  // namespace gess
