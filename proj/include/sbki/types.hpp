#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace sbki {

using Vec3 = Eigen::Vector3d;

// Class 0 is always the free-space class.
using ClassId = std::uint32_t;
inline constexpr ClassId kFreeClass = 0;

// Thrown for dimension mismatches, out-of-range labels and invalid settings.
class InvalidArgument : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// A one-hot semantic measurement of dimension K.
class OneHot {
public:
    OneHot() = default;
    OneHot(ClassId index, std::size_t num_classes)
        : index_(index), size_(static_cast<std::uint32_t>(num_classes)) {
        if (num_classes < 2) {
            throw InvalidArgument("one-hot label needs at least 2 classes");
        }
        if (index >= num_classes) {
            throw InvalidArgument("class id " + std::to_string(index) + " out of range for K=" +
                                  std::to_string(num_classes));
        }
    }

    ClassId index() const { return index_; }
    std::size_t size() const { return size_; }
    double operator[](std::size_t k) const { return k == index_ ? 1.0 : 0.0; }

    bool operator==(const OneHot&) const = default;

private:
    ClassId index_ = 0;
    std::uint32_t size_ = 0;
};

struct LabeledPoint {
    Vec3 position = Vec3::Zero();
    OneHot label;
};

enum class CellState : std::uint8_t { Free, Occupied, Unknown };

inline const char* to_string(CellState s) {
    switch (s) {
    case CellState::Free: return "free";
    case CellState::Occupied: return "occupied";
    case CellState::Unknown: return "unknown";
    }
    return "?";
}

}  // namespace sbki
