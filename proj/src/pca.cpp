#include "idface/pca.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstring>
#include <fstream>

namespace idface {

PcaModel fit_pca(const EmbeddingSet& corpus, int k) {
    const int n = static_cast<int>(corpus.size());
    const int d = kIdDim;
    if (n < 2) throw insufficient_data_error("fit_pca needs at least 2 embeddings");
    const int k_max = std::min(d, n - 1);
    if (k < 1 || k > k_max)
        throw component_out_of_range_error("k must be in [1, " + std::to_string(k_max) + "], got " +
                                           std::to_string(k));

    Eigen::MatrixXd x(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) x(i, j) = corpus.embeddings[static_cast<size_t>(i)][j];

    const Eigen::RowVectorXd mean = x.colwise().mean();
    x.rowwise() -= mean;

    Eigen::BDCSVD<Eigen::MatrixXd> svd(x, Eigen::ComputeThinV);
    const Eigen::VectorXd& sigma = svd.singularValues();
    const Eigen::MatrixXd& v = svd.matrixV();  // d x min(n,d)

    PcaModel model;
    model.dim = static_cast<uint32_t>(d);
    model.mean.assign(mean.data(), mean.data() + d);
    model.total_variance = x.squaredNorm() / static_cast<double>(n - 1);

    model.variances.resize(static_cast<size_t>(k));
    model.components.resize(static_cast<size_t>(k) * static_cast<size_t>(d));
    for (int i = 0; i < k; ++i) {
        model.variances[static_cast<size_t>(i)] = sigma(i) * sigma(i) / static_cast<double>(n - 1);
        Eigen::VectorXd comp = v.col(i);
        // canonical sign: largest-magnitude coordinate positive
        int arg = 0;
        comp.cwiseAbs().maxCoeff(&arg);
        if (comp(arg) < 0.0) comp = -comp;
        for (int j = 0; j < d; ++j)
            model.components[static_cast<size_t>(i) * static_cast<size_t>(d) +
                             static_cast<size_t>(j)] = comp(j);
    }

    int trivial = d;  // directions beyond min(n-1, d) have zero variance
    for (int i = 0; i < sigma.size() && i < k_max; ++i) {
        if (sigma(i) * sigma(i) / static_cast<double>(n - 1) >= 1e-12) --trivial;
    }
    model.degenerate = trivial > d - k;
    return model;
}

std::vector<double> explained_variance_curve(const PcaModel& model) {
    std::vector<double> curve(model.variances.size());
    double acc = 0.0;
    for (size_t i = 0; i < model.variances.size(); ++i) {
        acc += model.variances[i];
        curve[i] = model.total_variance > 0.0 ? acc / model.total_variance : 0.0;
    }
    return curve;
}

IdEmbedding project_reconstruct(const PcaModel& model, const IdEmbedding& w, int k) {
    if (k < 1 || k > static_cast<int>(model.k()))
        throw component_out_of_range_error("k must be in [1, " + std::to_string(model.k()) +
                                           "], got " + std::to_string(k));
    const int d = static_cast<int>(model.dim);
    std::vector<double> centered(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j)
        centered[static_cast<size_t>(j)] = static_cast<double>(w[j]) - model.mean[static_cast<size_t>(j)];
    std::vector<double> recon(model.mean);
    for (int i = 0; i < k; ++i) {
        const double* comp = model.component(static_cast<uint32_t>(i));
        double coeff = 0.0;
        for (int j = 0; j < d; ++j) coeff += comp[j] * centered[static_cast<size_t>(j)];
        for (int j = 0; j < d; ++j) recon[static_cast<size_t>(j)] += coeff * comp[j];
    }
    std::vector<float> out(static_cast<size_t>(d));
    for (int j = 0; j < d; ++j) out[static_cast<size_t>(j)] = static_cast<float>(recon[static_cast<size_t>(j)]);
    return IdEmbedding::normalize(out);
}

namespace {

constexpr char kMagic[4] = {'P', 'C', 'A', '1'};

void put_u32(std::ostream& os, uint32_t v) {
    unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                          static_cast<unsigned char>((v >> 8) & 0xff),
                          static_cast<unsigned char>((v >> 16) & 0xff),
                          static_cast<unsigned char>((v >> 24) & 0xff)};
    os.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t get_u32(std::istream& is, const std::string& path) {
    unsigned char b[4];
    if (!is.read(reinterpret_cast<char*>(b), 4)) throw format_error(path + ": truncated header");
    return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
           (static_cast<uint32_t>(b[2]) << 16) | (static_cast<uint32_t>(b[3]) << 24);
}

void put_f32_array(std::ostream& os, const std::vector<double>& v) {
    std::vector<float> tmp(v.begin(), v.end());
    os.write(reinterpret_cast<const char*>(tmp.data()),
             static_cast<std::streamsize>(tmp.size() * 4));
}

std::vector<double> get_f32_array(std::istream& is, size_t n, const std::string& path) {
    std::vector<float> tmp(n);
    if (!is.read(reinterpret_cast<char*>(tmp.data()), static_cast<std::streamsize>(n * 4)))
        throw format_error(path + ": truncated payload");
    return {tmp.begin(), tmp.end()};
}

}  // namespace

void write_pca(const std::string& path, const PcaModel& model) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw unreadable_input_error("cannot open for write: " + path);
    os.write(kMagic, 4);
    put_u32(os, model.k());
    put_u32(os, model.dim);
    put_f32_array(os, model.mean);
    put_f32_array(os, model.components);
    put_f32_array(os, model.variances);
    static_assert(sizeof(double) == 8);
    os.write(reinterpret_cast<const char*>(&model.total_variance), 8);
    if (!os) throw unreadable_input_error("write failed: " + path);
}

PcaModel read_pca(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw unreadable_input_error("cannot open: " + path);
    char magic[4];
    if (!is.read(magic, 4)) throw format_error(path + ": truncated at offset 0");
    if (std::memcmp(magic, kMagic, 4) != 0)
        throw format_error(path + ": bad magic at offset 0, expected \"PCA1\"");
    PcaModel model;
    const uint32_t k = get_u32(is, path);
    model.dim = get_u32(is, path);
    if (model.dim == 0 || k == 0) throw format_error(path + ": zero dimension or k");
    model.mean = get_f32_array(is, model.dim, path);
    model.components = get_f32_array(is, static_cast<size_t>(k) * model.dim, path);
    model.variances = get_f32_array(is, k, path);
    if (!is.read(reinterpret_cast<char*>(&model.total_variance), 8))
        throw format_error(path + ": truncated total_variance");
    return model;
}

}  // namespace idface
