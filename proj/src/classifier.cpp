// SPDX-License-Identifier: Apache-2.0
#include "disputekit/classifier.hpp"

#include "disputekit/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace disputekit {

namespace {

double sigmoid(double z) {
    if (z >= 0) {
        return 1.0 / (1.0 + std::exp(-z));
    }
    const double e = std::exp(z);
    return e / (1.0 + e);
}

void check_training_set(const Matrix& x, const std::vector<int>& y) {
    if (x.empty() || x.size() != y.size()) {
        throw CalibrationError("training set is empty or has mismatched labels");
    }
    const std::size_t d = x.front().size();
    for (const auto& row : x) {
        if (row.size() != d) {
            throw CalibrationError("training rows have inconsistent dimension");
        }
    }
}

class Logistic final : public BinaryClassifier {
public:
    Logistic(std::vector<double> w, double b) : w_(std::move(w)), b_(b) {}
    double score(const std::vector<double>& x) const override {
        double z = b_;
        for (std::size_t i = 0; i < w_.size() && i < x.size(); ++i) {
            z += w_[i] * x[i];
        }
        return sigmoid(z);
    }
    Family family() const override { return Family::logistic; }
    nlohmann::json to_json() const override {
        return {{"family", "logistic"}, {"weights", w_}, {"bias", b_}};
    }

private:
    std::vector<double> w_;
    double b_;
};

struct Stump {
    std::size_t feature = 0;
    double threshold = 0.0;
    double left = 0.0;  // x[feature] <= threshold
    double right = 0.0;
};

class Stumps final : public BinaryClassifier {
public:
    Stumps(double base, std::vector<Stump> stumps) : base_(base), stumps_(std::move(stumps)) {}
    double score(const std::vector<double>& x) const override {
        double f = base_;
        for (const auto& s : stumps_) {
            const double v = s.feature < x.size() ? x[s.feature] : 0.0;
            f += v <= s.threshold ? s.left : s.right;
        }
        return sigmoid(f);
    }
    Family family() const override { return Family::stumps; }
    nlohmann::json to_json() const override {
        nlohmann::json arr = nlohmann::json::array();
        for (const auto& s : stumps_) {
            arr.push_back({s.feature, s.threshold, s.left, s.right});
        }
        return {{"family", "stumps"}, {"base", base_}, {"stumps", arr}};
    }

private:
    double base_;
    std::vector<Stump> stumps_;
};

double cosine(const std::vector<double>& a, const std::vector<double>& b) {
    double ab = 0.0;
    double aa = 0.0;
    double bb = 0.0;
    const std::size_t n = std::min(a.size(), b.size());
    for (std::size_t i = 0; i < n; ++i) {
        ab += a[i] * b[i];
        aa += a[i] * a[i];
        bb += b[i] * b[i];
    }
    if (aa == 0.0 || bb == 0.0) {
        return 0.0;
    }
    return ab / std::sqrt(aa * bb);
}

class Knn final : public BinaryClassifier {
public:
    Knn(Matrix x, std::vector<int> y, int k) : x_(std::move(x)), y_(std::move(y)), k_(k) {}
    double score(const std::vector<double>& q) const override {
        std::vector<std::pair<double, std::size_t>> sims(x_.size());
        for (std::size_t i = 0; i < x_.size(); ++i) {
            sims[i] = {-cosine(q, x_[i]), i};
        }
        const std::size_t k = std::min<std::size_t>(static_cast<std::size_t>(k_), sims.size());
        std::partial_sort(sims.begin(), sims.begin() + static_cast<std::ptrdiff_t>(k), sims.end());
        double pos = 0.0;
        for (std::size_t i = 0; i < k; ++i) {
            pos += y_[sims[i].second];
        }
        return pos / static_cast<double>(k);
    }
    Family family() const override { return Family::knn; }
    nlohmann::json to_json() const override {
        return {{"family", "knn"}, {"k", k_}, {"rows", x_}, {"labels", y_}};
    }

private:
    Matrix x_;
    std::vector<int> y_;
    int k_;
};

class Constant final : public BinaryClassifier {
public:
    explicit Constant(double v) : v_(v) {}
    double score(const std::vector<double>&) const override { return v_; }
    Family family() const override { return Family::constant; }
    nlohmann::json to_json() const override { return {{"family", "constant"}, {"value", v_}}; }

private:
    double v_;
};

} // namespace

std::string family_name(Family f) {
    switch (f) {
    case Family::logistic: return "logistic";
    case Family::stumps: return "stumps";
    case Family::knn: return "knn";
    case Family::constant: return "constant";
    }
    return "unknown";
}

Family parse_family(std::string_view name) {
    for (Family f : {Family::logistic, Family::stumps, Family::knn, Family::constant}) {
        if (family_name(f) == name) {
            return f;
        }
    }
    throw CalibrationError("unknown classifier family '" + std::string(name) + "'");
}

std::unique_ptr<BinaryClassifier> train_logistic(const Matrix& x, const std::vector<int>& y,
                                                 const LogisticParams& p) {
    check_training_set(x, y);
    const std::size_t n = x.size();
    const std::size_t d = x.front().size();
    std::vector<double> w(d, 0.0);
    double b = 0.0;
    std::vector<double> grad(d);
    // Full-batch gradient descent with heavy-ball momentum.
    std::vector<double> vel(d, 0.0);
    double vel_b = 0.0;
    constexpr double momentum = 0.9;
    for (int it = 0; it < p.iterations; ++it) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_b = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            double z = b;
            for (std::size_t j = 0; j < d; ++j) {
                z += w[j] * x[i][j];
            }
            const double r = sigmoid(z) - y[i];
            for (std::size_t j = 0; j < d; ++j) {
                grad[j] += r * x[i][j];
            }
            grad_b += r;
        }
        for (std::size_t j = 0; j < d; ++j) {
            const double g = grad[j] / static_cast<double>(n) + p.l2 * w[j];
            vel[j] = momentum * vel[j] - p.learning_rate * g;
            w[j] += vel[j];
        }
        vel_b = momentum * vel_b - p.learning_rate * grad_b / static_cast<double>(n);
        b += vel_b;
    }
    return std::make_unique<Logistic>(std::move(w), b);
}

std::unique_ptr<BinaryClassifier> train_stumps(const Matrix& x, const std::vector<int>& y,
                                               const StumpParams& p) {
    check_training_set(x, y);
    const std::size_t n = x.size();
    const std::size_t d = x.front().size();
    const double pos = std::accumulate(y.begin(), y.end(), 0.0);
    const double prior = std::clamp(pos / static_cast<double>(n), 1e-6, 1.0 - 1e-6);
    const double base = std::log(prior / (1.0 - prior));

    std::vector<std::vector<std::size_t>> order(d, std::vector<std::size_t>(n));
    for (std::size_t j = 0; j < d; ++j) {
        std::iota(order[j].begin(), order[j].end(), 0);
        std::stable_sort(order[j].begin(), order[j].end(),
                         [&](std::size_t a, std::size_t b) { return x[a][j] < x[b][j]; });
    }

    std::vector<double> f(n, base);
    std::vector<double> g(n);
    std::vector<double> h(n);
    std::vector<Stump> stumps;
    for (int round = 0; round < p.rounds; ++round) {
        double gt = 0.0;
        double ht = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double pi = sigmoid(f[i]);
            g[i] = pi - y[i];
            h[i] = std::max(pi * (1.0 - pi), 1e-12);
            gt += g[i];
            ht += h[i];
        }
        double best_gain = -1.0;
        Stump best;
        for (std::size_t j = 0; j < d; ++j) {
            double gl = 0.0;
            double hl = 0.0;
            const auto& ord = order[j];
            for (std::size_t k = 0; k + 1 < n; ++k) {
                gl += g[ord[k]];
                hl += h[ord[k]];
                const double v = x[ord[k]][j];
                const double next = x[ord[k + 1]][j];
                if (next <= v) {
                    continue;
                }
                const double gr = gt - gl;
                const double hr = ht - hl;
                const double gain = gl * gl / (hl + p.lambda) + gr * gr / (hr + p.lambda);
                if (gain > best_gain + 1e-12) {
                    best_gain = gain;
                    best = {j, 0.5 * (v + next), -gl / (hl + p.lambda), -gr / (hr + p.lambda)};
                }
            }
        }
        if (best_gain < 0.0) {
            break; // every feature is constant
        }
        best.left *= p.shrinkage;
        best.right *= p.shrinkage;
        for (std::size_t i = 0; i < n; ++i) {
            f[i] += x[i][best.feature] <= best.threshold ? best.left : best.right;
        }
        stumps.push_back(best);
    }
    return std::make_unique<Stumps>(base, std::move(stumps));
}

std::unique_ptr<BinaryClassifier> train_knn(const Matrix& x, const std::vector<int>& y, const KnnParams& p) {
    check_training_set(x, y);
    if (p.k < 1) {
        throw CalibrationError("knn requires k >= 1");
    }
    return std::make_unique<Knn>(x, y, p.k);
}

std::unique_ptr<BinaryClassifier> make_constant(double value) { return std::make_unique<Constant>(value); }

std::unique_ptr<BinaryClassifier> train_family(Family f, const Matrix& x, const std::vector<int>& y) {
    switch (f) {
    case Family::logistic: return train_logistic(x, y);
    case Family::stumps: return train_stumps(x, y);
    case Family::knn: return train_knn(x, y);
    case Family::constant: break;
    }
    throw CalibrationError("family '" + family_name(f) + "' is not trainable");
}

std::unique_ptr<BinaryClassifier> classifier_from_json(const nlohmann::json& j) {
    try {
        const Family f = parse_family(j.at("family").get<std::string>());
        switch (f) {
        case Family::logistic:
            return std::make_unique<Logistic>(j.at("weights").get<std::vector<double>>(), j.at("bias").get<double>());
        case Family::stumps: {
            std::vector<Stump> stumps;
            for (const auto& s : j.at("stumps")) {
                stumps.push_back({s.at(0).get<std::size_t>(), s.at(1).get<double>(), s.at(2).get<double>(),
                                  s.at(3).get<double>()});
            }
            return std::make_unique<Stumps>(j.at("base").get<double>(), std::move(stumps));
        }
        case Family::knn:
            return std::make_unique<Knn>(j.at("rows").get<Matrix>(), j.at("labels").get<std::vector<int>>(),
                                         j.at("k").get<int>());
        case Family::constant:
            return std::make_unique<Constant>(j.at("value").get<double>());
        }
    } catch (const nlohmann::json::exception& ex) {
        throw CalibrationError(std::string("malformed classifier: ") + ex.what());
    }
    throw CalibrationError("malformed classifier");
}

} // namespace disputekit
