#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dpe {

// Dense heads x length x width single-precision tensor, row-major.
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t heads, std::size_t length, std::size_t width, float fill = 0.0f)
        : heads_(heads), length_(length), width_(width), data_(heads * length * width, fill) {}

    std::size_t heads() const noexcept { return heads_; }
    std::size_t length() const noexcept { return length_; }
    std::size_t width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    std::span<float> row(std::size_t h, std::size_t l) { return {data_.data() + (h * length_ + l) * width_, width_}; }
    std::span<const float> row(std::size_t h, std::size_t l) const {
        return {data_.data() + (h * length_ + l) * width_, width_};
    }
    float& at(std::size_t h, std::size_t l, std::size_t c) { return data_[(h * length_ + l) * width_ + c]; }
    float at(std::size_t h, std::size_t l, std::size_t c) const { return data_[(h * length_ + l) * width_ + c]; }

    std::span<float> data() noexcept { return data_; }
    std::span<const float> data() const noexcept { return data_; }

    bool same_shape(const Tensor3& o) const noexcept {
        return heads_ == o.heads_ && length_ == o.length_ && width_ == o.width_;
    }
    bool operator==(const Tensor3&) const = default;

private:
    std::size_t heads_ = 0;
    std::size_t length_ = 0;
    std::size_t width_ = 0;
    std::vector<float> data_;
};

}  // namespace dpe
