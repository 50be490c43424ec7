#pragma once

#include "fhiqa/network/model.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace fhiqa::network {

struct InferenceItem {
    std::string key;  // keys the crop random stream
    std::optional<dataset::Rect> roi;
};

// Runs forward_image over every item; `image_at(i)` supplies the decoded
// image. Output order follows `items` regardless of `workers`.
std::vector<core::QualityPrediction> predict_all(const QualityModel& model, const std::vector<InferenceItem>& items,
                                                 const std::function<cv::Mat(std::size_t)>& image_at,
                                                 std::uint64_t seed, std::size_t workers);

}  // namespace fhiqa::network
