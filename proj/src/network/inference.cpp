#include "fhiqa/network/inference.hpp"

#include "fhiqa/util/parallel.hpp"

namespace fhiqa::network {

std::vector<core::QualityPrediction> predict_all(const QualityModel& model, const std::vector<InferenceItem>& items,
                                                 const std::function<cv::Mat(std::size_t)>& image_at,
                                                 std::uint64_t seed, std::size_t workers) {
    const auto table = model.affine_table();
    std::vector<core::QualityPrediction> out(items.size());
    util::parallel_for(items.size(), workers, [&](std::size_t i) {
        out[i] = forward_image(model, image_at(i), items[i].key, items[i].roi, seed, table);
    });
    return out;
}

}  // namespace fhiqa::network
