#include "croppat/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>

#include "croppat/error.hpp"
#include "croppat/rng.hpp"

namespace croppat {

namespace {

bool valid_label_name(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        bool ok = (c >= 'A' && c <= 'Z') || (c >= 'a' && c <= 'z') ||
                  (c >= '0' && c <= '9') || c == '_' || c == '-';
        if (!ok) return false;
    }
    return true;
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

std::vector<std::size_t> Dataset::class_counts() const {
    std::vector<std::size_t> counts(class_names.size(), 0);
    for (const auto& s : samples) counts[static_cast<std::size_t>(s.label)]++;
    return counts;
}

void Dataset::validate() const {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        if (s.features.size() != feature_count)
            throw DataError("sample " + std::to_string(i) + " has " +
                            std::to_string(s.features.size()) + " features, expected " +
                            std::to_string(feature_count));
        if (s.label < 0 || s.label >= class_count())
            throw DataError("sample " + std::to_string(i) + " has label index " +
                            std::to_string(s.label) + " outside 0.." +
                            std::to_string(class_count() - 1));
    }
}

Dataset load_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file, expected a header row");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    auto header = split_fields(line);
    if (header.size() < 2)
        throw DataError(path + ": line 1: header must be f0,...,f{F-1},label");
    std::size_t feature_count = header.size() - 1;
    for (std::size_t i = 0; i < feature_count; ++i) {
        if (header[i] != "f" + std::to_string(i))
            throw DataError(path + ": line 1: header field " + std::to_string(i) +
                            " is '" + header[i] + "', expected 'f" + std::to_string(i) + "'");
    }
    if (header.back() != "label")
        throw DataError(path + ": line 1: last header field must be 'label'");

    Dataset d;
    d.feature_count = feature_count;

    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;  // trailing newline

        auto fields = split_fields(line);
        if (fields.size() != feature_count + 1)
            throw DataError(path + ": line " + std::to_string(line_no) + ": has " +
                            std::to_string(fields.size()) + " fields, expected " +
                            std::to_string(feature_count + 1));

        Sample s;
        s.features.reserve(feature_count);
        for (std::size_t i = 0; i < feature_count; ++i) {
            const std::string& tok = fields[i];
            double v = 0.0;
            auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
            if (res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": non-numeric feature value '" + tok + "'");
            if (!std::isfinite(v))
                throw DataError(path + ": line " + std::to_string(line_no) +
                                ": non-finite feature value '" + tok + "'");
            s.features.push_back(v);
        }

        const std::string& label = fields.back();
        if (!valid_label_name(label))
            throw DataError(path + ": line " + std::to_string(line_no) +
                            ": invalid class label '" + label + "' (allowed: [A-Za-z0-9_-]+)");
        auto it = std::find(d.class_names.begin(), d.class_names.end(), label);
        if (it == d.class_names.end()) {
            s.label = static_cast<int>(d.class_names.size());
            d.class_names.push_back(label);
        } else {
            s.label = static_cast<int>(it - d.class_names.begin());
        }
        d.samples.push_back(std::move(s));
    }
    return d;
}

void write_csv(const Dataset& d, const std::string& path) {
    d.validate();
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot open file for writing: " + path);

    for (std::size_t i = 0; i < d.feature_count; ++i) out << "f" << i << ",";
    out << "label\n";
    for (const auto& s : d.samples) {
        for (double v : s.features) out << format_double(v) << ",";
        out << d.class_names[static_cast<std::size_t>(s.label)] << "\n";
    }
    if (!out) throw DataError("write failed: " + path);
}

std::pair<Dataset, Dataset> stratified_split(const Dataset& d, const SplitSpec& spec) {
    if (spec.train_fraction <= 0.0 || spec.train_fraction >= 1.0)
        throw UsageError("train_fraction must lie strictly between 0 and 1");
    d.validate();

    auto counts = d.class_counts();
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] < 2)
            throw DataError("class '" + d.class_names[c] + "' has " +
                            std::to_string(counts[c]) + " samples; need at least 2 to split");
    }

    // Membership is drawn per class by a seeded shuffle; emitted samples
    // keep their original dataset order.
    std::vector<char> in_train(d.size(), 0);
    Rng rng(spec.seed);
    for (int c = 0; c < d.class_count(); ++c) {
        std::vector<std::size_t> idx;
        for (std::size_t i = 0; i < d.size(); ++i)
            if (d.samples[i].label == c) idx.push_back(i);
        rng.shuffle(idx);

        auto n_c = idx.size();
        auto n_train = static_cast<std::size_t>(
            std::llround(spec.train_fraction * static_cast<double>(n_c)));
        n_train = std::clamp<std::size_t>(n_train, 1, n_c - 1);
        for (std::size_t j = 0; j < n_train; ++j) in_train[idx[j]] = 1;
    }

    Dataset train, test;
    train.class_names = test.class_names = d.class_names;
    train.feature_count = test.feature_count = d.feature_count;
    for (std::size_t i = 0; i < d.size(); ++i)
        (in_train[i] ? train : test).samples.push_back(d.samples[i]);
    return {std::move(train), std::move(test)};
}

Normalizer fit_normalizer(const Dataset& train) {
    if (train.samples.empty()) throw DataError("cannot fit normalizer on an empty training set");
    Normalizer n;
    n.mins.assign(train.feature_count, std::numeric_limits<double>::infinity());
    n.maxs.assign(train.feature_count, -std::numeric_limits<double>::infinity());
    for (const auto& s : train.samples) {
        for (std::size_t f = 0; f < train.feature_count; ++f) {
            n.mins[f] = std::min(n.mins[f], s.features[f]);
            n.maxs[f] = std::max(n.maxs[f], s.features[f]);
        }
    }
    return n;
}

Dataset Normalizer::apply(const Dataset& d) const {
    if (d.feature_count != mins.size())
        throw DataError("normalizer was fitted on " + std::to_string(mins.size()) +
                        " features, dataset has " + std::to_string(d.feature_count));
    Dataset out = d;
    for (auto& s : out.samples) s.features = apply_row(s.features);
    return out;
}

std::vector<double> Normalizer::apply_row(std::span<const double> x) const {
    if (x.size() != mins.size())
        throw DataError("normalizer was fitted on " + std::to_string(mins.size()) +
                        " features, input has " + std::to_string(x.size()));
    std::vector<double> out(x.size());
    for (std::size_t f = 0; f < x.size(); ++f) {
        double range = maxs[f] - mins[f];
        out[f] = range == 0.0 ? 0.0 : (x[f] - mins[f]) / range;
    }
    return out;
}

std::vector<double> synthetic_prototype(int k, const SyntheticSpec& spec) {
    const int K = spec.class_count;
    const std::size_t F = spec.feature_count;

    // Class-specific seasonal shape. Green-up timing walks across the
    // season with the class index; plateau length, steepness, baseline and
    // amplitude cycle through small deterministic menus.
    const double green_mid = 0.10 + 0.55 * static_cast<double>(k) / static_cast<double>(K);
    const double sen_mid = green_mid + 0.16 + 0.12 * static_cast<double>((k * 5) % 7) / 7.0;
    const double green_rate = 26.0 + 6.0 * static_cast<double>((k * 3) % 5);
    const double sen_rate = 20.0 + 5.0 * static_cast<double>((k * 7) % 4);
    const double base = 0.10 + 0.04 * static_cast<double>(k % 3);
    const double amplitude = 0.55 + 0.075 * static_cast<double>((2 * k + 1) % 5);

    std::vector<double> proto(F);
    for (std::size_t i = 0; i < F; ++i) {
        double t = static_cast<double>(i) / static_cast<double>(F - 1);
        proto[i] = base + amplitude * (sigmoid(green_rate * (t - green_mid)) -
                                       sigmoid(sen_rate * (t - sen_mid)));
    }
    return proto;
}

Dataset generate_synthetic(const SyntheticSpec& spec) {
    if (spec.class_count < 2) throw UsageError("class_count must be at least 2");
    if (spec.feature_count < 2) throw UsageError("feature_count must be at least 2");
    if (spec.samples_per_class < 1) throw UsageError("samples_per_class must be positive");
    if (!(spec.noise_sigma >= 0.0)) throw UsageError("noise_sigma must be nonnegative");

    Dataset d;
    d.feature_count = spec.feature_count;
    for (int k = 0; k < spec.class_count; ++k)
        d.class_names.push_back("class" + std::to_string(k));

    Rng rng(spec.seed);
    d.samples.reserve(static_cast<std::size_t>(spec.class_count) * spec.samples_per_class);
    for (int k = 0; k < spec.class_count; ++k) {
        auto proto = synthetic_prototype(k, spec);
        for (std::size_t s = 0; s < spec.samples_per_class; ++s) {
            Sample sample;
            sample.label = k;
            sample.features.resize(spec.feature_count);
            for (std::size_t f = 0; f < spec.feature_count; ++f)
                sample.features[f] = proto[f] + spec.noise_sigma * rng.next_normal();
            d.samples.push_back(std::move(sample));
        }
    }
    return d;
}

}  // namespace croppat
