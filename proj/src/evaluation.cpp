// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "wctlab/evaluation.hpp"

#include <algorithm>
#include <iomanip>
#include <map>
#include <sstream>

#include "wctlab/error.hpp"

namespace wct {

namespace {

std::string percent(std::optional<double> a) {
    if (!a) return "N/A";
    std::ostringstream os;
    os << std::fixed << std::setprecision(1) << (*a * 100.0) << "%";
    return os.str();
}

std::string fraction(std::optional<double> a) {
    if (!a) return "N/A";
    std::ostringstream os;
    os << std::setprecision(10) << *a;
    return os.str();
}

// CSV fields must not contain the separators.
std::string clean(std::string s) {
    std::replace(s.begin(), s.end(), ',', '_');
    std::replace(s.begin(), s.end(), '|', '_');
    return s;
}

std::string snr_key(double snr) {
    std::ostringstream os;
    os << std::setprecision(17) << snr;
    return os.str();
}

std::vector<std::string> split_fields(const std::string& line) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream is(line);
    while (std::getline(is, field, ',')) out.push_back(field);
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

std::int64_t to_count(const std::string& s, int line) {
    try {
        std::size_t pos = 0;
        const auto v = std::stoll(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw FormatError("csv line " + std::to_string(line) + ": expected an integer, got '" + s + "'");
    }
}

} // namespace

std::optional<double> Tally::accuracy() const {
    if (total == 0) return std::nullopt;
    return static_cast<double>(correct) / static_cast<double>(total);
}

double TaskConfusion::accuracy() const {
    const auto t = total();
    return t == 0 ? 0.0 : static_cast<double>(counts.trace()) / static_cast<double>(t);
}

Tally TaskConfusion::class_tally(int k) const {
    return {counts(k, k), counts.row(k).sum()};
}

double EvalReport::overall_accuracy() const { return exact.accuracy().value_or(0.0); }

std::vector<double> EvalReport::per_task_accuracy() const {
    std::vector<double> out;
    for (const auto& t : tasks) out.push_back(t.accuracy());
    return out;
}

std::optional<double> EvalReport::reconstructed_wct_accuracy() const {
    if (scheme != LabelScheme::kMultiTask) return std::nullopt;
    return exact.accuracy();
}

EvalReport evaluate(const Eigen::MatrixXi& predicted, const Eigen::MatrixXi& truth, const ColumnMetaList& meta,
                    const std::vector<double>& snr_grid, LabelScheme scheme, const TaskLayout& layout) {
    if (predicted.rows() != truth.rows() || predicted.cols() != truth.cols())
        throw ConfigError("prediction and truth shapes differ");
    if (static_cast<std::size_t>(predicted.rows()) != layout.tasks.size())
        throw ConfigError("prediction rows do not match the task count");
    if (static_cast<std::size_t>(predicted.cols()) != meta.size()) throw ConfigError("metadata count differs from sample count");

    EvalReport r;
    r.scheme = scheme;
    r.n_eval = predicted.cols();
    for (const auto& t : layout.tasks) r.tasks.push_back({t.feature, t.classes, CountMatrix::Zero(t.k(), t.k())});
    for (double s : snr_grid) r.per_snr.push_back({s, {}});

    for (Eigen::Index j = 0; j < predicted.cols(); ++j) {
        bool all = true;
        for (Eigen::Index t = 0; t < predicted.rows(); ++t) {
            const int p = predicted(t, j);
            const int y = truth(t, j);
            auto& cm = r.tasks[static_cast<std::size_t>(t)].counts;
            if (p < 0 || y < 0 || p >= cm.rows() || y >= cm.rows()) throw ConfigError("class index out of range");
            ++cm(y, p);
            all = all && p == y;
        }
        r.exact.total += 1;
        r.exact.correct += all ? 1 : 0;
        const auto snr = meta[static_cast<std::size_t>(j)].snr;
        if (snr >= r.per_snr.size()) throw ConfigError("snr index out of range of the grid");
        r.per_snr[snr].tally.total += 1;
        r.per_snr[snr].tally.correct += all ? 1 : 0;
    }
    return r;
}

EvalReport evaluate(const Mlp<float>& model, const Eigen::MatrixXf& samples, const LabelMatrix& labels,
                    const ColumnMetaList& meta, const std::vector<double>& snr_grid) {
    if (labels.scheme != model.scheme || labels.layout.segment_sizes() != model.head.segment_sizes())
        throw ConfigError("dataset labeling scheme (" + to_string(labels.scheme) + ") does not match the model head (" +
                          to_string(model.scheme) + ")");
    Eigen::MatrixXi predicted(static_cast<Eigen::Index>(model.head.tasks.size()), samples.cols());
    constexpr Eigen::Index kChunk = 4096;
    for (Eigen::Index b = 0; b < samples.cols(); b += kChunk) {
        const Eigen::Index n = std::min(kChunk, samples.cols() - b);
        predicted.middleCols(b, n) = predict<float>(model, samples.middleCols(b, n));
    }
    EvalReport r = evaluate(predicted, label_indices(labels), meta, snr_grid, labels.scheme, labels.layout);
    r.input_dim = static_cast<int>(samples.rows());
    return r;
}

std::string render_text(const EvalReport& r) {
    std::ostringstream os;
    const int w = 40;
    os << std::left;
    os << std::setw(w) << "Task";
    for (const auto& t : r.tasks) os << " | " << std::setw(14) << t.name;
    if (r.scheme == LabelScheme::kMultiTask) os << " | " << std::setw(14) << "reconstructed";
    os << "\n" << std::string(w + 17 * (r.tasks.size() + (r.scheme == LabelScheme::kMultiTask)), '-') << "\n";

    os << std::setw(w) << "Input dimension of inference data set";
    const std::string in_dim = std::to_string(r.input_dim) + "x" + std::to_string(r.n_eval);
    for (std::size_t i = 0; i < r.tasks.size(); ++i) os << " | " << std::setw(14) << in_dim;
    if (r.scheme == LabelScheme::kMultiTask) os << " | " << std::setw(14) << in_dim;
    os << "\n" << std::setw(w) << "Output dimension of inference data set";
    for (const auto& t : r.tasks) os << " | " << std::setw(14) << (std::to_string(t.classes.size()) + "x" + std::to_string(r.n_eval));
    if (r.scheme == LabelScheme::kMultiTask) os << " | " << std::setw(14) << "-";
    os << "\n" << std::setw(w) << "Classification accuracy";
    for (const auto& t : r.tasks) os << " | " << std::setw(14) << percent(r.n_eval ? std::optional<double>(t.accuracy()) : std::nullopt);
    if (r.scheme == LabelScheme::kMultiTask) os << " | " << std::setw(14) << percent(r.exact.accuracy());
    os << "\n\n";

    for (const auto& t : r.tasks) {
        os << "Per-class accuracy (" << t.name << ")\n";
        for (std::size_t k = 0; k < t.classes.size(); ++k) {
            const Tally tl = t.class_tally(static_cast<int>(k));
            os << "  " << std::setw(28) << t.classes[k] << " n=" << std::setw(8) << tl.total << " " << percent(tl.accuracy()) << "\n";
        }
        os << "Confusion (" << t.name << "; rows true, columns predicted)\n";
        for (Eigen::Index i = 0; i < t.counts.rows(); ++i) {
            os << "  " << std::setw(28) << t.classes[static_cast<std::size_t>(i)];
            for (Eigen::Index j = 0; j < t.counts.cols(); ++j) os << std::right << std::setw(8) << t.counts(i, j) << std::left;
            os << "\n";
        }
        os << "\n";
    }

    os << "Per-SNR accuracy" << (r.scheme == LabelScheme::kMultiTask ? " (all tasks correct)" : "") << "\n";
    for (const auto& s : r.per_snr)
        os << "  " << std::right << std::setw(6) << s.snr_db << std::left << " dB  n=" << std::setw(8) << s.tally.total << " "
           << percent(s.tally.accuracy()) << "\n";
    return os.str();
}

std::string render_csv(const EvalReport& r) {
    std::ostringstream os;
    os << "section,task,key,correct,total,accuracy\n";
    os << "scheme,,," << ",," << to_string(r.scheme) << "\n";
    os << "dims,,input_dim," << r.input_dim << "," << r.n_eval << ",\n";
    for (const auto& t : r.tasks) {
        const std::string name = clean(t.name);
        os << "task," << name << ",," << t.counts.trace() << "," << t.total() << ","
           << fraction(t.total() ? std::optional<double>(t.accuracy()) : std::nullopt) << "\n";
        for (std::size_t k = 0; k < t.classes.size(); ++k) {
            const Tally tl = t.class_tally(static_cast<int>(k));
            os << "class," << name << "," << clean(t.classes[k]) << "," << tl.correct << "," << tl.total << ","
               << fraction(tl.accuracy()) << "\n";
        }
        for (Eigen::Index i = 0; i < t.counts.rows(); ++i)
            for (Eigen::Index j = 0; j < t.counts.cols(); ++j)
                os << "confusion," << name << "," << clean(t.classes[static_cast<std::size_t>(i)]) << "|"
                   << clean(t.classes[static_cast<std::size_t>(j)]) << "," << t.counts(i, j) << ",,\n";
    }
    for (const auto& s : r.per_snr)
        os << "snr,," << snr_key(s.snr_db) << "," << s.tally.correct << "," << s.tally.total << "," << fraction(s.tally.accuracy()) << "\n";
    os << "exact,,all_tasks," << r.exact.correct << "," << r.exact.total << "," << fraction(r.exact.accuracy()) << "\n";
    return os.str();
}

EvalReport parse_csv(const std::string& csv) {
    std::istringstream is(csv);
    std::string line;
    if (!std::getline(is, line) || line != "section,task,key,correct,total,accuracy") throw FormatError("csv: missing or wrong header row");

    EvalReport r;
    std::map<std::string, std::size_t> task_index;
    std::vector<std::vector<std::int64_t>> cells;
    int lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.empty()) continue;
        const auto f = split_fields(line);
        if (f.size() != 6) throw FormatError("csv line " + std::to_string(lineno) + ": expected 6 fields");
        const std::string& section = f[0];
        if (section == "scheme") {
            r.scheme = label_scheme_from_string(f[5]);
        } else if (section == "dims") {
            r.input_dim = static_cast<int>(to_count(f[3], lineno));
            r.n_eval = to_count(f[4], lineno);
        } else if (section == "task") {
            task_index[f[1]] = r.tasks.size();
            r.tasks.push_back({f[1], {}, {}});
            cells.emplace_back();
        } else if (section == "class") {
            if (!task_index.count(f[1])) throw FormatError("csv line " + std::to_string(lineno) + ": class row before its task row");
            r.tasks[task_index[f[1]]].classes.push_back(f[2]);
        } else if (section == "confusion") {
            if (!task_index.count(f[1])) throw FormatError("csv line " + std::to_string(lineno) + ": confusion row before its task row");
            cells[task_index[f[1]]].push_back(to_count(f[3], lineno));
        } else if (section == "snr") {
            r.per_snr.push_back({std::stod(f[2]), {to_count(f[3], lineno), to_count(f[4], lineno)}});
        } else if (section == "exact") {
            r.exact = {to_count(f[3], lineno), to_count(f[4], lineno)};
        } else {
            throw FormatError("csv line " + std::to_string(lineno) + ": unknown section '" + section + "'");
        }
    }
    for (std::size_t t = 0; t < r.tasks.size(); ++t) {
        const auto k = static_cast<Eigen::Index>(r.tasks[t].classes.size());
        if (static_cast<Eigen::Index>(cells[t].size()) != k * k)
            throw FormatError("csv: task '" + r.tasks[t].name + "' has " + std::to_string(cells[t].size()) + " confusion cells, expected " +
                              std::to_string(k * k));
        r.tasks[t].counts.resize(k, k);
        for (Eigen::Index i = 0; i < k; ++i)
            for (Eigen::Index j = 0; j < k; ++j) r.tasks[t].counts(i, j) = cells[t][static_cast<std::size_t>(i * k + j)];
    }
    return r;
}

} // namespace wct
