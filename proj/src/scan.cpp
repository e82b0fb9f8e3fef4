#include "ptycho/scan.hpp"

namespace ptycho {

ScanGeometry::ScanGeometry(std::vector<ScanPosition> positions, std::size_t frame_side, Shape object_shape)
    : positions_(std::move(positions)), frame_side_(frame_side), object_shape_(object_shape)
{
    if (positions_.empty()) throw std::invalid_argument("scan geometry needs at least one position");
    if (frame_side_ == 0) throw std::invalid_argument("frame side must be positive");
    for (std::size_t j = 0; j < positions_.size(); ++j) {
        const auto& p = positions_[j];
        if (p.row + frame_side_ > object_shape_.rows || p.col + frame_side_ > object_shape_.cols)
            throw std::invalid_argument("window " + std::to_string(j) + " at (" + std::to_string(p.row) + ", " +
                                        std::to_string(p.col) + ") leaves object " + to_string(object_shape_));
    }
}

const ScanPosition& ScanGeometry::position(std::size_t j) const
{
    if (j >= positions_.size())
        throw std::out_of_range("frame index " + std::to_string(j) + " out of range (J = " +
                                std::to_string(positions_.size()) + ")");
    return positions_[j];
}

RealField2D ScanGeometry::coverage() const
{
    RealField2D cov(object_shape_);
    RealField2D ones(frame_shape(), 1.0);
    for (std::size_t j = 0; j < num_frames(); ++j) embed_accumulate(ones, *this, j, cov);
    return cov;
}

bool ScanGeometry::covers_object() const
{
    const auto cov = coverage();
    return std::all_of(cov.begin(), cov.end(), [](double v) { return v > 0.0; });
}

ScanGeometry raster_scan(Shape object_shape, std::size_t frame_side, std::size_t step)
{
    if (step == 0) throw std::invalid_argument("raster step must be >= 1");
    if (frame_side == 0) throw std::invalid_argument("frame side must be positive");
    if (frame_side > object_shape.rows || frame_side > object_shape.cols)
        throw std::invalid_argument("frame side " + std::to_string(frame_side) + " larger than object " +
                                    to_string(object_shape));

    auto axis = [&](std::size_t side) {
        std::vector<std::size_t> starts;
        for (std::size_t s = 0; s + frame_side <= side; s += step) starts.push_back(s);
        if (starts.back() + frame_side < side && step <= frame_side) starts.push_back(side - frame_side);
        return starts;
    };
    const auto rows = axis(object_shape.rows);
    const auto cols = axis(object_shape.cols);
    std::vector<ScanPosition> positions;
    positions.reserve(rows.size() * cols.size());
    for (std::size_t r : rows)
        for (std::size_t c : cols) positions.push_back({r, c});
    return ScanGeometry(std::move(positions), frame_side, object_shape);
}

}  // namespace ptycho
