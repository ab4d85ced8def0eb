// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <json.hpp>

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace disputekit {

using Matrix = std::vector<std::vector<double>>;

enum class Family { logistic, stumps, knn, constant };

std::string family_name(Family f);
Family parse_family(std::string_view name);

/// Binary scorer returning a value in [0, 1]; higher means positive.
class BinaryClassifier {
public:
    virtual ~BinaryClassifier() = default;
    virtual double score(const std::vector<double>& x) const = 0;
    virtual Family family() const = 0;
    virtual nlohmann::json to_json() const = 0;
};

struct LogisticParams {
    int iterations = 400;
    double learning_rate = 0.5;
    double l2 = 1e-3;
};

struct StumpParams {
    int rounds = 100;
    double shrinkage = 0.1;
    double lambda = 1.0; // leaf regularizer
};

struct KnnParams {
    int k = 5;
};

std::unique_ptr<BinaryClassifier> train_logistic(const Matrix& x, const std::vector<int>& y,
                                                 const LogisticParams& p = {});
std::unique_ptr<BinaryClassifier> train_stumps(const Matrix& x, const std::vector<int>& y,
                                               const StumpParams& p = {});
std::unique_ptr<BinaryClassifier> train_knn(const Matrix& x, const std::vector<int>& y,
                                            const KnnParams& p = {});
std::unique_ptr<BinaryClassifier> make_constant(double value);

std::unique_ptr<BinaryClassifier> train_family(Family f, const Matrix& x, const std::vector<int>& y);

/// Inverse of BinaryClassifier::to_json.
std::unique_ptr<BinaryClassifier> classifier_from_json(const nlohmann::json& j);

} // namespace disputekit
