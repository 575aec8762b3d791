#include "metarec/classifiers.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "metarec/csv.hpp"
#include "metarec/error.hpp"
#include "metarec/random.hpp"

namespace metarec {

namespace {

constexpr double kPi = 3.14159265358979323846;

enum class ParamKind { integer, real, limit };

struct ParamSpec {
    const char* name;
    ParamKind kind;
    ParamValue fallback;
};

const std::vector<ParamSpec>& schema(Family family) {
    static const std::map<Family, std::vector<ParamSpec>> table = {
        {Family::knn, {{"k", ParamKind::integer, 5LL}}},
        {Family::logistic_regression,
         {{"lambda", ParamKind::real, 1.0}, {"max_iter", ParamKind::integer, 500LL}, {"tol", ParamKind::real, 1e-6}}},
        {Family::majority, {}},
        {Family::naive_bayes, {{"var_smoothing", ParamKind::real, 1e-9}}},
        {Family::neural_network,
         {{"hidden", ParamKind::integer, 5LL},
          {"epochs", ParamKind::integer, 300LL},
          {"learning_rate", ParamKind::real, 0.1}}},
        {Family::random_forest, {{"trees", ParamKind::integer, 10LL}, {"max_depth", ParamKind::limit, 12LL}}},
        {Family::svm, {{"C", ParamKind::real, 1.0}, {"epochs", ParamKind::integer, 50LL}}},
        {Family::decision_tree,
         {{"max_depth", ParamKind::limit, std::string("none")}, {"min_leaf", ParamKind::integer, 2LL}}},
    };
    return table.at(family);
}

std::string format_value(const ParamValue& v) {
    if (const auto* i = std::get_if<long long>(&v)) return std::to_string(*i);
    if (const auto* d = std::get_if<double>(&v)) return csv::format_double(*d);
    return std::get<std::string>(v);
}

ParamValue coerce(Family family, const ParamSpec& spec, const ParamValue& value) {
    const std::string where = to_string(family) + "." + spec.name;
    switch (spec.kind) {
        case ParamKind::integer: {
            long long v;
            if (const auto* i = std::get_if<long long>(&value)) v = *i;
            else if (const auto* d = std::get_if<double>(&value); d && std::floor(*d) == *d) v = static_cast<long long>(*d);
            else throw ValidationError(where + ": expected an integer");
            if (v < 1) throw ValidationError(where + ": must be >= 1");
            return v;
        }
        case ParamKind::real: {
            double v;
            if (const auto* i = std::get_if<long long>(&value)) v = static_cast<double>(*i);
            else if (const auto* d = std::get_if<double>(&value)) v = *d;
            else throw ValidationError(where + ": expected a number");
            if (!std::isfinite(v) || v < 0.0) throw ValidationError(where + ": must be finite and >= 0");
            if (v == 0.0 && std::string(spec.name) != "lambda") throw ValidationError(where + ": must be > 0");
            return v;
        }
        case ParamKind::limit: {
            if (const auto* s = std::get_if<std::string>(&value)) {
                if (*s != "none") throw ValidationError(where + ": expected an integer or \"none\"");
                return *s;
            }
            ParamSpec as_int{spec.name, ParamKind::integer, 0LL};
            return coerce(family, as_int, value);
        }
    }
    return value;
}

ParamValue parse_value(const std::string& text) {
    if (auto i = csv::parse_int(text)) return *i;
    if (auto d = csv::parse_double(text)) return *d;
    return text;
}

// ---------------------------------------------------------------------------

void check_training_input(const ClassifierConfig& config, const Matrix& X, std::span<const int> y) {
    if (static_cast<std::size_t>(X.rows()) != y.size())
        throw TrainingError(config.id() + ": " + std::to_string(X.rows()) + " rows but " +
                            std::to_string(y.size()) + " labels");
    if (y.empty()) throw TrainingError(config.id() + ": no training rows");
    if (!X.allFinite()) throw TrainingError(config.id() + ": non-finite input cell");
    bool seen[2] = {false, false};
    for (int label : y) {
        if (label != 0 && label != 1) throw TrainingError(config.id() + ": labels must be 0 or 1");
        seen[label] = true;
    }
    if (config.family() != Family::majority && !(seen[0] && seen[1]))
        throw TrainingError(config.id() + ": both classes must be present");
}

int vote(std::size_t ones, std::size_t zeros) { return ones > zeros ? 1 : 0; }

/// Per-column z-score from training statistics; zero spread maps to scale 1.
struct Standardizer {
    Eigen::RowVectorXd mean;
    Eigen::RowVectorXd inv_scale;

    explicit Standardizer(const Matrix& X) {
        const double n = static_cast<double>(X.rows());
        mean = X.colwise().sum() / n;
        inv_scale.resize(X.cols());
        for (Eigen::Index j = 0; j < X.cols(); ++j) {
            const double var = (X.col(j).array() - mean(j)).square().sum() / n;
            inv_scale(j) = var > 0.0 ? 1.0 / std::sqrt(var) : 1.0;
        }
    }

    Matrix apply(const Matrix& X) const {
        return ((X.rowwise() - mean).array().rowwise() * inv_scale.array()).matrix();
    }

    void apply_row(std::span<const double> x, std::vector<double>& out) const {
        out.resize(x.size());
        for (std::size_t j = 0; j < x.size(); ++j)
            out[j] = (x[j] - mean(static_cast<Eigen::Index>(j))) * inv_scale(static_cast<Eigen::Index>(j));
    }
};

double sigmoid(double z) {
    if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
    const double e = std::exp(z);
    return e / (1.0 + e);
}

// --- majority ---------------------------------------------------------------

class MajorityModel final : public Model {
public:
    explicit MajorityModel(std::span<const int> y) {
        const auto ones = static_cast<std::size_t>(std::count(y.begin(), y.end(), 1));
        label_ = vote(ones, y.size() - ones);
    }
    int predict_row(std::span<const double>) const override { return label_; }

private:
    int label_ = 0;
};

// --- knn -------------------------------------------------------------------

class KnnModel final : public Model {
public:
    KnnModel(const Matrix& X, std::span<const int> y, long long k)
        : scaler_(X), X_(scaler_.apply(X)), y_(y.begin(), y.end()),
          k_(std::min<std::size_t>(static_cast<std::size_t>(k), y.size())) {}

    int predict_row(std::span<const double> x) const override {
        std::vector<double> z;
        scaler_.apply_row(x, z);
        const Eigen::Map<const Eigen::RowVectorXd> q(z.data(), static_cast<Eigen::Index>(z.size()));
        std::vector<std::pair<double, int>> dist(y_.size());
        for (std::size_t i = 0; i < y_.size(); ++i)
            dist[i] = {(X_.row(static_cast<Eigen::Index>(i)) - q).squaredNorm(), y_[i]};
        // (distance, label) ordering keeps the neighbour set independent of row order.
        std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
        std::size_t ones = 0;
        for (std::size_t i = 0; i < k_; ++i) ones += dist[i].second == 1;
        return vote(ones, k_ - ones);
    }

private:
    Standardizer scaler_;
    Matrix X_;
    std::vector<int> y_;
    std::size_t k_;
};

// --- naive bayes -------------------------------------------------------------

class GaussianNbModel final : public Model {
public:
    GaussianNbModel(const Matrix& X, std::span<const int> y, double smoothing) {
        const Eigen::Index m = X.cols();
        double max_var = 0.0;
        for (Eigen::Index j = 0; j < m; ++j) {
            const double mu = X.col(j).mean();
            max_var = std::max(max_var, (X.col(j).array() - mu).square().mean());
        }
        const double eps = smoothing * (max_var > 0.0 ? max_var : 1.0);
        for (int c = 0; c < 2; ++c) {
            std::vector<Eigen::Index> rows;
            for (std::size_t i = 0; i < y.size(); ++i)
                if (y[i] == c) rows.push_back(static_cast<Eigen::Index>(i));
            const double nc = static_cast<double>(rows.size());
            log_prior_[c] = std::log(nc / static_cast<double>(y.size()));
            mean_[c] = Eigen::RowVectorXd::Zero(m);
            var_[c] = Eigen::RowVectorXd::Zero(m);
            for (auto r : rows) mean_[c] += X.row(r);
            mean_[c] /= nc;
            for (auto r : rows) var_[c] += (X.row(r) - mean_[c]).array().square().matrix();
            var_[c] = (var_[c] / nc).array() + eps;
            log_norm_[c] = -0.5 * (var_[c].array() * 2.0 * kPi).log().sum();
        }
    }

    int predict_row(std::span<const double> x) const override {
        const Eigen::Map<const Eigen::RowVectorXd> q(x.data(), static_cast<Eigen::Index>(x.size()));
        double score[2];
        for (int c = 0; c < 2; ++c)
            score[c] = log_prior_[c] + log_norm_[c] -
                       0.5 * ((q - mean_[c]).array().square() / var_[c].array()).sum();
        return score[1] > score[0] ? 1 : 0;
    }

private:
    double log_prior_[2]{};
    double log_norm_[2]{};
    Eigen::RowVectorXd mean_[2];
    Eigen::RowVectorXd var_[2];
};

// --- logistic regression ------------------------------------------------------

class LogisticModel final : public Model {
public:
    LogisticModel(const Matrix& X, std::span<const int> y, double lambda, long long max_iter, double tol)
        : scaler_(X) {
        const Matrix Z = scaler_.apply(X);
        const Eigen::Index n = Z.rows(), m = Z.cols();
        const double dn = static_cast<double>(n);
        Eigen::VectorXd target(n);
        for (Eigen::Index i = 0; i < n; ++i) target(i) = y[static_cast<std::size_t>(i)];

        // Step 1/L with L the gradient's Lipschitz constant: 0.25 * lambda_max([Z 1]'[Z 1] / n) + lambda.
        Eigen::MatrixXd gram(m + 1, m + 1);
        gram.topLeftCorner(m, m) = Z.transpose() * Z / dn;
        gram.topRightCorner(m, 1) = Z.colwise().sum().transpose() / dn;
        gram.bottomLeftCorner(1, m) = gram.topRightCorner(m, 1).transpose();
        gram(m, m) = 1.0;
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(gram, Eigen::EigenvaluesOnly);
        const double step = 1.0 / (0.25 * solver.eigenvalues().maxCoeff() + lambda);

        w_ = Eigen::VectorXd::Zero(m);
        b_ = 0.0;
        for (long long it = 0; it < max_iter; ++it) {
            Eigen::VectorXd residual = ((Z * w_).array() + b_).unaryExpr(&sigmoid).matrix() - target;
            const Eigen::VectorXd grad_w = Z.transpose() * residual / dn + lambda * w_;
            const double grad_b = residual.sum() / dn;
            w_ -= step * grad_w;
            b_ -= step * grad_b;
            if (std::max(grad_w.cwiseAbs().maxCoeff(), std::abs(grad_b)) < tol) break;
        }
        if (!w_.allFinite() || !std::isfinite(b_)) throw TrainingError("logistic_regression: diverged");
    }

    int predict_row(std::span<const double> x) const override {
        std::vector<double> z;
        scaler_.apply_row(x, z);
        double s = b_;
        for (std::size_t j = 0; j < z.size(); ++j) s += w_(static_cast<Eigen::Index>(j)) * z[j];
        return s > 0.0 ? 1 : 0;
    }

private:
    Standardizer scaler_;
    Eigen::VectorXd w_;
    double b_ = 0.0;
};

// --- neural network -------------------------------------------------------------

/// One hidden layer of logistic units, logistic output, cross-entropy loss,
/// per-sample SGD with a fresh seeded visiting order each epoch.
class NeuralNetModel final : public Model {
public:
    NeuralNetModel(const Matrix& X, std::span<const int> y, long long hidden, long long epochs,
                   double rate, std::uint64_t seed)
        : scaler_(X), m_(static_cast<std::size_t>(X.cols())), h_(static_cast<std::size_t>(hidden)) {
        const Matrix Z = scaler_.apply(X);
        const std::size_t n = y.size();
        Engine engine(seed);
        w1_.resize(h_ * m_);
        b1_.assign(h_, 0.0);
        w2_.resize(h_);
        const double r1 = 1.0 / std::sqrt(static_cast<double>(m_ > 0 ? m_ : 1));
        const double r2 = 1.0 / std::sqrt(static_cast<double>(h_));
        for (auto& w : w1_) w = (2.0 * uniform_unit(engine) - 1.0) * r1;
        for (auto& w : w2_) w = (2.0 * uniform_unit(engine) - 1.0) * r2;

        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::vector<double> hid(h_), dh(h_);
        for (long long e = 0; e < epochs; ++e) {
            shuffle(std::span<std::size_t>(order), engine);
            for (std::size_t i : order) {
                const double* x = Z.data() + i * m_;
                const double out = forward(x, hid.data());
                const double delta = out - static_cast<double>(y[i]);
                for (std::size_t k = 0; k < h_; ++k) {
                    dh[k] = rate * delta * w2_[k] * hid[k] * (1.0 - hid[k]);
                    w2_[k] -= rate * delta * hid[k];
                    b1_[k] -= dh[k];
                }
                for (std::size_t j = 0; j < m_; ++j) {
                    double* w = w1_.data() + j * h_;
                    const double xj = x[j];
                    for (std::size_t k = 0; k < h_; ++k) w[k] -= dh[k] * xj;
                }
                b2_ -= rate * delta;
            }
        }
    }

    int predict_row(std::span<const double> x) const override {
        std::vector<double> z, hid(h_);
        scaler_.apply_row(x, z);
        return forward(z.data(), hid.data()) > 0.5 ? 1 : 0;
    }

private:
    // w1_ is input-major (w1_[j * h_ + k] links input j to hidden unit k) so the
    // inner loops run over contiguous hidden units.
    double forward(const double* x, double* hid) const {
        std::copy(b1_.begin(), b1_.end(), hid);
        for (std::size_t j = 0; j < m_; ++j) {
            const double* w = w1_.data() + j * h_;
            const double xj = x[j];
            for (std::size_t k = 0; k < h_; ++k) hid[k] += w[k] * xj;
        }
        Eigen::Map<Eigen::ArrayXd> act(hid, static_cast<Eigen::Index>(h_));
        act = 1.0 / (1.0 + (-act).exp());
        double s = b2_;
        for (std::size_t k = 0; k < h_; ++k) s += w2_[k] * hid[k];
        return sigmoid(s);
    }

    Standardizer scaler_;
    std::size_t m_, h_;
    std::vector<double> w1_, b1_, w2_;
    double b2_ = 0.0;
};

// --- linear svm -------------------------------------------------------------------

/// Primal hinge-loss SVM trained with Pegasos SGD; the bias is an appended
/// constant feature and is regularized with the weights.
class LinearSvmModel final : public Model {
public:
    LinearSvmModel(const Matrix& X, std::span<const int> y, double C, long long epochs, std::uint64_t seed)
        : scaler_(X) {
        const Matrix Z = scaler_.apply(X);
        const std::size_t n = y.size(), m = static_cast<std::size_t>(Z.cols());
        const double lambda = 1.0 / (C * static_cast<double>(n));
        w_.assign(m + 1, 0.0);
        Engine engine(seed);
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        double t = 0.0;
        for (long long e = 0; e < epochs; ++e) {
            shuffle(std::span<std::size_t>(order), engine);
            for (std::size_t i : order) {
                t += 1.0;
                const double eta = 1.0 / (lambda * t);
                const double label = y[i] == 1 ? 1.0 : -1.0;
                const double* x = Z.data() + i * m;
                double margin = w_[m];
                for (std::size_t j = 0; j < m; ++j) margin += w_[j] * x[j];
                margin *= label;
                const double shrink = 1.0 - eta * lambda;
                for (auto& w : w_) w *= shrink;
                if (margin < 1.0) {
                    for (std::size_t j = 0; j < m; ++j) w_[j] += eta * label * x[j];
                    w_[m] += eta * label;
                }
            }
        }
    }

    int predict_row(std::span<const double> x) const override {
        std::vector<double> z;
        scaler_.apply_row(x, z);
        double s = w_.back();
        for (std::size_t j = 0; j < z.size(); ++j) s += w_[j] * z[j];
        return s > 0.0 ? 1 : 0;
    }

private:
    Standardizer scaler_;
    std::vector<double> w_;
};

// --- CART ----------------------------------------------------------------------------

struct TreeOptions {
    std::optional<long long> max_depth;
    std::size_t min_leaf = 1;
    std::size_t features_per_split = 0;  // 0 = all
};

struct TreeNode {
    int feature = -1;  // -1 marks a leaf
    double threshold = 0.0;
    std::size_t left = 0, right = 0;
    int label = 0;
};

/// Fitted CART tree stored as a flat node array.
class Tree {
public:
    explicit Tree(std::vector<TreeNode> nodes) : nodes_(std::move(nodes)) {}

    int predict(std::span<const double> x) const {
        std::size_t node = 0;
        while (nodes_[node].feature >= 0) {
            const TreeNode& nd = nodes_[node];
            node = x[static_cast<std::size_t>(nd.feature)] <= nd.threshold ? nd.left : nd.right;
        }
        return nodes_[node].label;
    }

private:
    std::vector<TreeNode> nodes_;
};

/// Grows a binary CART tree with gini impurity. An impure node is always split
/// on the best admissible threshold, even when no split lowers the impurity
/// (XOR-like data); ties between candidate splits keep the first one found.
class TreeBuilder {
public:
    TreeBuilder(const Matrix& X, std::span<const int> y, const TreeOptions& opt, Engine* engine)
        : X_(X), y_(y), opt_(opt), engine_(engine) {
        features_.resize(static_cast<std::size_t>(X.cols()));
        std::iota(features_.begin(), features_.end(), 0);
    }

    Tree grow(std::vector<std::size_t> rows) {
        nodes_.clear();
        build(rows, 0);
        return Tree(std::move(nodes_));
    }

private:
    static double gini(double ones, double total) {
        if (total == 0.0) return 0.0;
        const double p = ones / total;
        return 2.0 * p * (1.0 - p);
    }

    double at(std::size_t row, std::size_t col) const {
        return X_(static_cast<Eigen::Index>(row), static_cast<Eigen::Index>(col));
    }

    std::size_t build(std::vector<std::size_t>& rows, long long depth) {
        const std::size_t index = nodes_.size();
        nodes_.emplace_back();
        std::size_t ones = 0;
        for (auto r : rows) ones += y_[r] == 1;
        nodes_[index].label = vote(ones, rows.size() - ones);

        const bool pure = ones == 0 || ones == rows.size();
        const bool depth_left = !opt_.max_depth || depth < *opt_.max_depth;
        if (pure || !depth_left || rows.size() < 2 * opt_.min_leaf) return index;

        std::size_t candidates = features_.size();
        if (opt_.features_per_split > 0 && opt_.features_per_split < features_.size()) {
            candidates = opt_.features_per_split;
            for (std::size_t i = 0; i < candidates; ++i) {
                const auto j = i + static_cast<std::size_t>(uniform_below(*engine_, features_.size() - i));
                std::swap(features_[i], features_[j]);
            }
        }
        std::vector<std::size_t> chosen(features_.begin(),
                                        features_.begin() + static_cast<std::ptrdiff_t>(candidates));
        std::sort(chosen.begin(), chosen.end());

        const double total = static_cast<double>(rows.size());
        double best_impurity = std::numeric_limits<double>::infinity();
        int best_feature = -1;
        double best_threshold = 0.0;
        std::vector<std::size_t> sorted = rows;
        for (std::size_t f : chosen) {
            std::sort(sorted.begin(), sorted.end(), [&](std::size_t a, std::size_t b) {
                const double va = at(a, f), vb = at(b, f);
                return va < vb || (va == vb && a < b);
            });
            std::size_t left_ones = 0;
            for (std::size_t i = 0; i + 1 < sorted.size(); ++i) {
                left_ones += y_[sorted[i]] == 1;
                const double v = at(sorted[i], f);
                const double next = at(sorted[i + 1], f);
                if (v == next) continue;
                const std::size_t left_n = i + 1, right_n = sorted.size() - left_n;
                if (left_n < opt_.min_leaf || right_n < opt_.min_leaf) continue;
                const double ln = static_cast<double>(left_n), rn = static_cast<double>(right_n);
                const double impurity = (ln * gini(static_cast<double>(left_ones), ln) +
                                         rn * gini(static_cast<double>(ones - left_ones), rn)) /
                                        total;
                if (impurity < best_impurity) {
                    best_impurity = impurity;
                    best_feature = static_cast<int>(f);
                    best_threshold = v + (next - v) / 2.0;
                    if (!(best_threshold < next)) best_threshold = v;
                }
            }
        }
        if (best_feature < 0) return index;

        std::vector<std::size_t> left, right;
        for (auto r : rows)
            (at(r, static_cast<std::size_t>(best_feature)) <= best_threshold ? left : right).push_back(r);
        rows.clear();
        rows.shrink_to_fit();
        const std::size_t l = build(left, depth + 1);
        const std::size_t r = build(right, depth + 1);
        nodes_[index].feature = best_feature;
        nodes_[index].threshold = best_threshold;
        nodes_[index].left = l;
        nodes_[index].right = r;
        return index;
    }

    const Matrix& X_;
    std::span<const int> y_;
    TreeOptions opt_;
    Engine* engine_;
    std::vector<std::size_t> features_;
    std::vector<TreeNode> nodes_;
};

class DecisionTreeModel final : public Model {
public:
    DecisionTreeModel(const Matrix& X, std::span<const int> y, const TreeOptions& opt)
        : tree_(grow_all(X, y, opt)) {}
    int predict_row(std::span<const double> x) const override { return tree_.predict(x); }

private:
    static Tree grow_all(const Matrix& X, std::span<const int> y, const TreeOptions& opt) {
        std::vector<std::size_t> rows(y.size());
        std::iota(rows.begin(), rows.end(), 0);
        return TreeBuilder(X, y, opt, nullptr).grow(std::move(rows));
    }

    Tree tree_;
};

class RandomForestModel final : public Model {
public:
    RandomForestModel(const Matrix& X, std::span<const int> y, long long trees, std::optional<long long> depth,
                      std::uint64_t seed) {
        TreeOptions opt;
        opt.max_depth = depth;
        opt.min_leaf = 1;
        opt.features_per_split =
            std::max<std::size_t>(1, static_cast<std::size_t>(std::sqrt(static_cast<double>(X.cols()))));
        const std::size_t n = y.size();
        trees_.reserve(static_cast<std::size_t>(trees));
        for (long long t = 0; t < trees; ++t) {
            Engine engine(derive_seed(seed, static_cast<std::uint64_t>(t)));
            std::vector<std::size_t> sample(n);
            for (auto& s : sample) s = static_cast<std::size_t>(uniform_below(engine, n));
            trees_.push_back(TreeBuilder(X, y, opt, &engine).grow(std::move(sample)));
        }
    }

    int predict_row(std::span<const double> x) const override {
        std::size_t ones = 0;
        for (const auto& t : trees_) ones += t.predict(x) == 1;
        return vote(ones, trees_.size() - ones);
    }

private:
    std::vector<Tree> trees_;
};

}  // namespace

// ---------------------------------------------------------------------------

std::string to_string(Family family) {
    switch (family) {
        case Family::knn: return "knn";
        case Family::logistic_regression: return "logistic_regression";
        case Family::majority: return "majority";
        case Family::naive_bayes: return "naive_bayes";
        case Family::neural_network: return "neural_network";
        case Family::random_forest: return "random_forest";
        case Family::svm: return "svm";
        case Family::decision_tree: return "decision_tree";
    }
    return "unknown";
}

Family family_from_string(const std::string& name) {
    for (Family f : kAllFamilies)
        if (to_string(f) == name) return f;
    throw ValidationError("unknown classifier family '" + name + "'");
}

ClassifierConfig ClassifierConfig::make(Family family, const std::map<std::string, ParamValue>& params) {
    const auto& specs = schema(family);
    for (const auto& [key, value] : params) {
        const bool known = std::any_of(specs.begin(), specs.end(), [&](const ParamSpec& s) { return key == s.name; });
        if (!known) throw ValidationError(to_string(family) + ": unknown parameter '" + key + "'");
    }
    ClassifierConfig c;
    c.family_ = family;
    for (const auto& spec : specs) {
        const auto it = params.find(spec.name);
        c.params_[spec.name] = coerce(family, spec, it != params.end() ? it->second : spec.fallback);
    }
    c.id_ = to_string(family) + "(";
    bool first = true;
    for (const auto& [key, value] : c.params_) {
        if (!first) c.id_ += ",";
        first = false;
        c.id_ += key + "=" + format_value(value);
    }
    c.id_ += ")";
    return c;
}

ClassifierConfig ClassifierConfig::parse(const std::string& id) {
    const auto open = id.find('(');
    if (open == std::string::npos || id.back() != ')') throw ValidationError("malformed classifier id '" + id + "'");
    const Family family = family_from_string(id.substr(0, open));
    std::map<std::string, ParamValue> params;
    const std::string body = id.substr(open + 1, id.size() - open - 2);
    std::size_t start = 0;
    while (start < body.size()) {
        std::size_t end = body.find(',', start);
        if (end == std::string::npos) end = body.size();
        const std::string item = body.substr(start, end - start);
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw ValidationError("malformed classifier id '" + id + "'");
        params[item.substr(0, eq)] = parse_value(item.substr(eq + 1));
        start = end + 1;
    }
    ClassifierConfig c = make(family, params);
    if (c.id() != id) throw ValidationError("classifier id '" + id + "' is not canonical (expected '" + c.id() + "')");
    return c;
}

long long ClassifierConfig::int_param(const std::string& key) const { return std::get<long long>(params_.at(key)); }

double ClassifierConfig::real_param(const std::string& key) const { return std::get<double>(params_.at(key)); }

std::optional<long long> ClassifierConfig::limit_param(const std::string& key) const {
    const auto& v = params_.at(key);
    if (const auto* i = std::get_if<long long>(&v)) return *i;
    return std::nullopt;
}

std::string family_of_id(const std::string& classifier_id) {
    return classifier_id.substr(0, classifier_id.find('('));
}

bool GridEntry::applies_to(const Dataset& ds) const {
    if (std::find(skip_datasets.begin(), skip_datasets.end(), ds.id()) != skip_datasets.end()) return false;
    if (numeric_only) {
        for (const auto& a : ds.attributes())
            if (a.kind == AttributeKind::categorical) return false;
    }
    return true;
}

std::vector<ClassifierConfig> default_grid() {
    using P = std::map<std::string, ParamValue>;
    return {
        ClassifierConfig::make(Family::knn, P{{"k", 1LL}}),
        ClassifierConfig::make(Family::knn, P{{"k", 5LL}}),
        ClassifierConfig::make(Family::knn, P{{"k", 15LL}}),
        ClassifierConfig::make(Family::logistic_regression, P{{"lambda", 0.01}}),
        ClassifierConfig::make(Family::logistic_regression, P{{"lambda", 1.0}}),
        ClassifierConfig::make(Family::majority),
        ClassifierConfig::make(Family::naive_bayes),
        ClassifierConfig::make(Family::neural_network, P{{"hidden", 5LL}}),
        ClassifierConfig::make(Family::neural_network, P{{"hidden", 20LL}}),
        ClassifierConfig::make(Family::random_forest, P{{"trees", 10LL}}),
        ClassifierConfig::make(Family::random_forest, P{{"trees", 50LL}}),
        ClassifierConfig::make(Family::svm, P{{"C", 0.1}}),
        ClassifierConfig::make(Family::svm, P{{"C", 1.0}}),
        ClassifierConfig::make(Family::decision_tree, P{{"max_depth", 6LL}}),
        ClassifierConfig::make(Family::decision_tree, P{{"max_depth", std::string("none")}}),
    };
}

std::vector<GridEntry> as_grid(const std::vector<ClassifierConfig>& configs) {
    std::vector<GridEntry> out;
    out.reserve(configs.size());
    for (const auto& c : configs) out.push_back(GridEntry{c, false, {}});
    return out;
}

std::vector<GridEntry> load_grid(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open grid file '" + path + "'");
    std::vector<GridEntry> grid;
    try {
        const auto doc = nlohmann::json::parse(in);
        if (!doc.is_array()) throw ParseError("grid file '" + path + "': expected an array");
        for (const auto& item : doc) {
            std::map<std::string, ParamValue> params;
            if (item.contains("params")) {
                for (const auto& [key, value] : item.at("params").items()) {
                    if (value.is_number_integer()) params[key] = value.get<long long>();
                    else if (value.is_number()) params[key] = value.get<double>();
                    else if (value.is_string()) params[key] = value.get<std::string>();
                    else throw ParseError("grid file '" + path + "': bad value for '" + key + "'");
                }
            }
            GridEntry entry{ClassifierConfig::make(family_from_string(item.at("family").get<std::string>()), params),
                            item.value("numeric_only", false),
                            item.value("skip_datasets", std::vector<std::string>{})};
            grid.push_back(std::move(entry));
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError("grid file '" + path + "': " + e.what());
    }
    return grid;
}

std::vector<int> TrainedModel::predict(const Matrix& X) const {
    if (static_cast<std::size_t>(X.cols()) != n_features_ && X.rows() > 0)
        throw ValidationError(config_.id() + ": expected " + std::to_string(n_features_) + " columns, got " +
                              std::to_string(X.cols()));
    std::vector<int> out(static_cast<std::size_t>(X.rows()));
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        out[static_cast<std::size_t>(i)] =
            model_->predict_row(std::span<const double>(X.data() + i * X.cols(), static_cast<std::size_t>(X.cols())));
    return out;
}

int TrainedModel::predict_row(std::span<const double> x) const {
    if (x.size() != n_features_)
        throw ValidationError(config_.id() + ": expected " + std::to_string(n_features_) + " columns, got " +
                              std::to_string(x.size()));
    return model_->predict_row(x);
}

TrainedModel fit(const ClassifierConfig& config, const Matrix& X, std::span<const int> y, std::uint64_t seed) {
    check_training_input(config, X, y);
    std::shared_ptr<const Model> model;
    switch (config.family()) {
        case Family::majority:
            model = std::make_shared<MajorityModel>(y);
            break;
        case Family::knn:
            model = std::make_shared<KnnModel>(X, y, config.int_param("k"));
            break;
        case Family::naive_bayes:
            model = std::make_shared<GaussianNbModel>(X, y, config.real_param("var_smoothing"));
            break;
        case Family::logistic_regression:
            model = std::make_shared<LogisticModel>(X, y, config.real_param("lambda"), config.int_param("max_iter"),
                                                    config.real_param("tol"));
            break;
        case Family::neural_network:
            model = std::make_shared<NeuralNetModel>(X, y, config.int_param("hidden"), config.int_param("epochs"),
                                                     config.real_param("learning_rate"), seed);
            break;
        case Family::svm:
            model = std::make_shared<LinearSvmModel>(X, y, config.real_param("C"), config.int_param("epochs"), seed);
            break;
        case Family::decision_tree: {
            TreeOptions opt;
            opt.max_depth = config.limit_param("max_depth");
            opt.min_leaf = static_cast<std::size_t>(config.int_param("min_leaf"));
            model = std::make_shared<DecisionTreeModel>(X, y, opt);
            break;
        }
        case Family::random_forest:
            model = std::make_shared<RandomForestModel>(X, y, config.int_param("trees"),
                                                        config.limit_param("max_depth"), seed);
            break;
    }
    return TrainedModel(config, std::move(model), static_cast<std::size_t>(X.cols()), seed);
}

}  // namespace metarec
