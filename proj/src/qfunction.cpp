// SPDX-License-Identifier: Apache-2.0
#include "qmce/qfunction.hpp"

#include <istream>
#include <ostream>
#include <sstream>

#include "qmce/errors.hpp"
#include "qmce/textio.hpp"

namespace qmce {

namespace {

std::span<double> as_span(Eigen::MatrixXd& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<double> as_span(Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}
std::span<const double> as_cspan(const Eigen::MatrixXd& m) {
    return {m.data(), static_cast<std::size_t>(m.size())};
}
std::span<const double> as_cspan(const Eigen::VectorXd& v) {
    return {v.data(), static_cast<std::size_t>(v.size())};
}

// Weight blocks are emitted as hexfloat tokens, eight per line; the reader
// only cares about whitespace separation.
void write_block(std::ostream& out, std::span<const double> values) {
    for (std::size_t i = 0; i < values.size(); ++i) {
        out << format_double_hex(values[i]);
        out << ((i % 8 == 7 || i + 1 == values.size()) ? '\n' : ' ');
    }
}

void read_block(std::istream& in, std::span<double> values) {
    std::string token;
    for (double& v : values) {
        if (!(in >> token)) throw ParseError("checkpoint ended mid-block");
        v = parse_double(token);
    }
}

void append(std::vector<double>& sink, std::span<const double> block) {
    sink.insert(sink.end(), block.begin(), block.end());
}

void write_dense_layer(std::ostream& out, const std::string& label,
                       const DenseLayer& layer) {
    out << "dense " << label << ' ' << activation_name(layer.activation) << ' '
        << layer.out_dim << ' ' << layer.in_dim << '\n';
    write_block(out, as_cspan(layer.weights));
    write_block(out, as_cspan(layer.bias));
}

DenseLayer read_dense_layer(std::istream& in, const std::string& expect_label) {
    std::string tag, label, act;
    int out_dim = 0, in_dim = 0;
    if (!(in >> tag >> label >> act >> out_dim >> in_dim) || tag != "dense" ||
        label != expect_label)
        throw ParseError("checkpoint: expected dense block '" + expect_label + "'");
    DenseLayer layer;
    layer.in_dim = in_dim;
    layer.out_dim = out_dim;
    layer.activation = activation_from_name(act);
    layer.weights.resize(out_dim, in_dim);
    layer.bias.resize(out_dim);
    layer.grad_weights = Eigen::MatrixXd::Zero(out_dim, in_dim);
    layer.grad_bias = Eigen::VectorXd::Zero(out_dim);
    read_block(in, as_span(layer.weights));
    read_block(in, as_span(layer.bias));
    return layer;
}

void write_net(std::ostream& out, const std::string& label, const DenseNet& net) {
    out << "net " << label << ' ' << net.layers.size() << '\n';
    for (std::size_t i = 0; i < net.layers.size(); ++i)
        write_dense_layer(out, label + "." + std::to_string(i), net.layers[i]);
}

DenseNet read_net(std::istream& in, const std::string& expect_label) {
    std::string tag, label;
    std::size_t count = 0;
    if (!(in >> tag >> label >> count) || tag != "net" || label != expect_label)
        throw ParseError("checkpoint: expected net block '" + expect_label + "'");
    DenseNet net;
    for (std::size_t i = 0; i < count; ++i)
        net.layers.push_back(read_dense_layer(in, label + "." + std::to_string(i)));
    return net;
}

} // namespace

// ---------------------------------------------------------------- ensemble

EnsembleQFunction::EnsembleQFunction(int input_dim, int num_actions, int k,
                                     int l, int num_layers, std::uint64_t seed)
    : EnsembleQFunction(
          make_ensemble_model(input_dim, num_actions, k, l, num_layers, seed)) {}

EnsembleQFunction::EnsembleQFunction(EnsembleModel model)
    : model_(std::move(model)),
      chip_states_(model_.chip_params.size()),
      head_w_states_(model_.head.layers.size()),
      head_b_states_(model_.head.layers.size()) {}

Eigen::VectorXd EnsembleQFunction::forward(
    const Eigen::Ref<const Eigen::VectorXd>& observation) const {
    return ensemble_forward(model_, observation);
}

Eigen::MatrixXd EnsembleQFunction::forward_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& observations) const {
    return ensemble_forward_batch(model_, observations);
}

void EnsembleQFunction::zero_grad() { ensemble_zero_grad(model_); }

void EnsembleQFunction::accumulate_grad(
    const Eigen::Ref<const Eigen::MatrixXd>& observations,
    const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) {
    ensemble_backward_batch(model_, observations, dloss_dq);
}

void EnsembleQFunction::adam_update(double alpha) {
    adam_step(as_span(model_.pre.weights), as_cspan(model_.pre.grad_weights),
              pre_w_state_, alpha);
    adam_step(as_span(model_.pre.bias), as_cspan(model_.pre.grad_bias),
              pre_b_state_, alpha);
    for (int i = 0; i < model_.k; ++i)
        adam_step(model_.chip_params[i], model_.chip_grads[i], chip_states_[i],
                  alpha);
    for (std::size_t i = 0; i < model_.head.layers.size(); ++i) {
        auto& layer = model_.head.layers[i];
        adam_step(as_span(layer.weights), as_cspan(layer.grad_weights),
                  head_w_states_[i], alpha);
        adam_step(as_span(layer.bias), as_cspan(layer.grad_bias),
                  head_b_states_[i], alpha);
    }
}

void EnsembleQFunction::copy_weights_from(const QFunction& other) {
    const auto* src = dynamic_cast<const EnsembleQFunction*>(&other);
    if (src == nullptr)
        throw ContractError("cannot copy weights across model kinds");
    model_.pre.weights = src->model_.pre.weights;
    model_.pre.bias = src->model_.pre.bias;
    model_.chip_params = src->model_.chip_params;
    for (std::size_t i = 0; i < model_.head.layers.size(); ++i) {
        model_.head.layers[i].weights = src->model_.head.layers[i].weights;
        model_.head.layers[i].bias = src->model_.head.layers[i].bias;
    }
}

std::unique_ptr<QFunction> EnsembleQFunction::clone() const {
    return std::make_unique<EnsembleQFunction>(*this);
}

std::vector<double> EnsembleQFunction::flat_weights() const {
    std::vector<double> flat;
    append(flat, as_cspan(model_.pre.weights));
    append(flat, as_cspan(model_.pre.bias));
    for (const auto& chip : model_.chip_params) append(flat, chip);
    for (const auto& layer : model_.head.layers) {
        append(flat, as_cspan(layer.weights));
        append(flat, as_cspan(layer.bias));
    }
    return flat;
}

void EnsembleQFunction::save(std::ostream& out) const {
    out << "qmce-checkpoint v1\n";
    out << "model ensemble\n";
    out << "input_dim " << model_.input_dim << '\n';
    out << "num_actions " << model_.num_actions << '\n';
    out << "k " << model_.k << '\n';
    out << "l " << model_.l << '\n';
    out << "layers " << model_.num_layers << '\n';
    out << "seed " << model_.seed << '\n';
    out << "circuit " << circuit_to_text(model_.chip_spec).size() << '\n';
    out << circuit_to_text(model_.chip_spec);
    write_dense_layer(out, "pre", model_.pre);
    for (int i = 0; i < model_.k; ++i) {
        out << "chip " << i << ' ' << model_.chip_params[i].size() << '\n';
        write_block(out, model_.chip_params[i]);
    }
    write_net(out, "head", model_.head);
}

// --------------------------------------------------------------- classical

ClassicalQFunction::ClassicalQFunction(int input_dim, int num_actions, int k,
                                       int l, int num_layers,
                                       std::uint64_t seed)
    : ClassicalQFunction(build_classical_baseline(input_dim, num_actions, k, l,
                                                  num_layers, seed)) {}

ClassicalQFunction::ClassicalQFunction(ClassicalBaseline model)
    : model_(std::move(model)),
      head_w_states_(model_.head.layers.size()),
      head_b_states_(model_.head.layers.size()) {
    std::size_t layer_total = 0;
    for (const auto& chip : model_.pseudo_chips)
        layer_total += chip.layers.size();
    chip_w_states_.resize(layer_total);
    chip_b_states_.resize(layer_total);
}

Eigen::VectorXd ClassicalQFunction::forward(
    const Eigen::Ref<const Eigen::VectorXd>& observation) const {
    return baseline_forward(model_, observation);
}

Eigen::MatrixXd ClassicalQFunction::forward_batch(
    const Eigen::Ref<const Eigen::MatrixXd>& observations) const {
    return baseline_forward_batch(model_, observations);
}

void ClassicalQFunction::zero_grad() { baseline_zero_grad(model_); }

void ClassicalQFunction::accumulate_grad(
    const Eigen::Ref<const Eigen::MatrixXd>& observations,
    const Eigen::Ref<const Eigen::MatrixXd>& dloss_dq) {
    baseline_backward_batch(model_, observations, dloss_dq);
}

void ClassicalQFunction::adam_update(double alpha) {
    adam_step(as_span(model_.pre.weights), as_cspan(model_.pre.grad_weights),
              pre_w_state_, alpha);
    adam_step(as_span(model_.pre.bias), as_cspan(model_.pre.grad_bias),
              pre_b_state_, alpha);
    std::size_t s = 0;
    for (auto& chip : model_.pseudo_chips) {
        for (auto& layer : chip.layers) {
            adam_step(as_span(layer.weights), as_cspan(layer.grad_weights),
                      chip_w_states_[s], alpha);
            adam_step(as_span(layer.bias), as_cspan(layer.grad_bias),
                      chip_b_states_[s], alpha);
            ++s;
        }
    }
    for (std::size_t i = 0; i < model_.head.layers.size(); ++i) {
        auto& layer = model_.head.layers[i];
        adam_step(as_span(layer.weights), as_cspan(layer.grad_weights),
                  head_w_states_[i], alpha);
        adam_step(as_span(layer.bias), as_cspan(layer.grad_bias),
                  head_b_states_[i], alpha);
    }
}

void ClassicalQFunction::copy_weights_from(const QFunction& other) {
    const auto* src = dynamic_cast<const ClassicalQFunction*>(&other);
    if (src == nullptr)
        throw ContractError("cannot copy weights across model kinds");
    model_.pre.weights = src->model_.pre.weights;
    model_.pre.bias = src->model_.pre.bias;
    for (int i = 0; i < model_.k; ++i)
        for (std::size_t j = 0; j < model_.pseudo_chips[i].layers.size(); ++j) {
            model_.pseudo_chips[i].layers[j].weights =
                src->model_.pseudo_chips[i].layers[j].weights;
            model_.pseudo_chips[i].layers[j].bias =
                src->model_.pseudo_chips[i].layers[j].bias;
        }
    for (std::size_t i = 0; i < model_.head.layers.size(); ++i) {
        model_.head.layers[i].weights = src->model_.head.layers[i].weights;
        model_.head.layers[i].bias = src->model_.head.layers[i].bias;
    }
}

std::unique_ptr<QFunction> ClassicalQFunction::clone() const {
    return std::make_unique<ClassicalQFunction>(*this);
}

std::vector<double> ClassicalQFunction::flat_weights() const {
    std::vector<double> flat;
    append(flat, as_cspan(model_.pre.weights));
    append(flat, as_cspan(model_.pre.bias));
    for (const auto& chip : model_.pseudo_chips)
        for (const auto& layer : chip.layers) {
            append(flat, as_cspan(layer.weights));
            append(flat, as_cspan(layer.bias));
        }
    for (const auto& layer : model_.head.layers) {
        append(flat, as_cspan(layer.weights));
        append(flat, as_cspan(layer.bias));
    }
    return flat;
}

void ClassicalQFunction::save(std::ostream& out) const {
    out << "qmce-checkpoint v1\n";
    out << "model classical\n";
    out << "input_dim " << model_.input_dim << '\n';
    out << "num_actions " << model_.num_actions << '\n';
    out << "k " << model_.k << '\n';
    out << "l " << model_.l << '\n';
    out << "layers " << model_.num_layers << '\n';
    out << "seed " << model_.seed << '\n';
    write_dense_layer(out, "pre", model_.pre);
    for (int i = 0; i < model_.k; ++i)
        write_net(out, "pseudo." + std::to_string(i), model_.pseudo_chips[i]);
    write_net(out, "head", model_.head);
}

// ------------------------------------------------------------------- load

std::unique_ptr<QFunction> load_qfunction(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "qmce-checkpoint v1")
        throw ParseError("not a qmce checkpoint");
    std::string tag, kind;
    if (!(in >> tag >> kind) || tag != "model")
        throw ParseError("checkpoint missing model kind");

    auto read_int_field = [&in](const std::string& name) {
        std::string t;
        long v = 0;
        if (!(in >> t >> v) || t != name)
            throw ParseError("checkpoint missing field '" + name + "'");
        return v;
    };
    const int input_dim = static_cast<int>(read_int_field("input_dim"));
    const int num_actions = static_cast<int>(read_int_field("num_actions"));
    const int k = static_cast<int>(read_int_field("k"));
    const int l = static_cast<int>(read_int_field("l"));
    const int layers = static_cast<int>(read_int_field("layers"));
    const std::uint64_t seed =
        static_cast<std::uint64_t>(read_int_field("seed"));

    if (kind == "ensemble") {
        const long circuit_len = read_int_field("circuit");
        in.ignore(1); // newline after the length
        std::string circuit_text(static_cast<std::size_t>(circuit_len), '\0');
        in.read(circuit_text.data(), circuit_len);
        if (in.gcount() != circuit_len)
            throw ParseError("checkpoint: truncated circuit block");

        EnsembleModel model;
        model.input_dim = input_dim;
        model.num_actions = num_actions;
        model.k = k;
        model.l = l;
        model.num_layers = layers;
        model.seed = seed;
        model.chip_spec = circuit_from_text(circuit_text);
        model.pre = read_dense_layer(in, "pre");
        model.chip_params.resize(k);
        model.chip_grads.resize(k);
        for (int i = 0; i < k; ++i) {
            std::string t;
            int idx = 0;
            std::size_t count = 0;
            if (!(in >> t >> idx >> count) || t != "chip" || idx != i)
                throw ParseError("checkpoint: expected chip block " +
                                 std::to_string(i));
            model.chip_params[i].resize(count);
            read_block(in, model.chip_params[i]);
            model.chip_grads[i].assign(count, 0.0);
        }
        model.head = read_net(in, "head");
        return std::make_unique<EnsembleQFunction>(std::move(model));
    }
    if (kind == "classical") {
        ClassicalBaseline model;
        model.input_dim = input_dim;
        model.num_actions = num_actions;
        model.k = k;
        model.l = l;
        model.num_layers = layers;
        model.seed = seed;
        model.pre = read_dense_layer(in, "pre");
        for (int i = 0; i < k; ++i)
            model.pseudo_chips.push_back(
                read_net(in, "pseudo." + std::to_string(i)));
        model.head = read_net(in, "head");
        return std::make_unique<ClassicalQFunction>(std::move(model));
    }
    throw ParseError("unknown checkpoint model kind '" + kind + "'");
}

} // namespace qmce
