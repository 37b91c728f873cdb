#include "camseer/error.hpp"
#include "camseer/neuralnet.hpp"

namespace camseer::nn {

void NetworkConfig::validate() const {
  const std::size_t layers = num_lstm_layers();
  require(layers == 1 || layers == 2, ErrorKind::InvalidParameter, "network needs 1 or 2 LSTM layers");
  require(dropout.size() == layers && recurrent_dropout.size() == layers, ErrorKind::InvalidParameter,
          "dropout lists must have one entry per LSTM layer");
  require(input_width > 0, ErrorKind::InvalidParameter, "input width must be positive");
  for (std::size_t k = 0; k < layers; ++k) {
    require(hidden_sizes[k] > 0, ErrorKind::InvalidParameter, "hidden sizes must be positive");
    require(dropout[k] >= 0.0 && dropout[k] < 1.0, ErrorKind::InvalidParameter, "dropout must lie in [0, 1)");
    require(recurrent_dropout[k] >= 0.0 && recurrent_dropout[k] < 1.0, ErrorKind::InvalidParameter,
            "recurrent dropout must lie in [0, 1)");
  }
  require(num_batchnorm <= 2, ErrorKind::InvalidParameter, "at most 2 batch normalization layers");
  require(l2_lambda >= 0.0, ErrorKind::InvalidParameter, "L2 must be non-negative");
  require(learning_rate > 0.0, ErrorKind::InvalidParameter, "learning rate must be positive");
  require(lr_decay > 0.0 && lr_decay <= 1.0, ErrorKind::InvalidParameter, "decay must lie in (0, 1]");
  require(batch_size > 0 && max_epochs > 0 && patience > 0, ErrorKind::InvalidParameter,
          "batch size, max epochs and patience must be positive");
  require(segment_length > 0, ErrorKind::InvalidParameter, "segment length must be positive");
  require(bn_momentum > 0.0 && bn_momentum < 1.0 && bn_epsilon > 0.0, ErrorKind::InvalidParameter,
          "batch normalization momentum must lie in (0, 1) and epsilon be positive");
}

NetworkConfig NetworkConfig::final_architecture() {
  NetworkConfig c;
  c.hidden_sizes = {1100, 300};
  c.dropout = {0.2, 0.2};
  c.recurrent_dropout = {0.0, 0.0};
  c.num_batchnorm = 1;
  c.l2_lambda = 1e-3;
  c.learning_rate = 1e-4;
  c.lr_decay = 0.99;
  c.batch_size = 128;
  c.patience = 3;
  c.segment_length = 50;
  return c;
}

io::json NetworkConfig::to_json() const {
  return {{"input_width", input_width},
          {"hidden_sizes", hidden_sizes},
          {"dropout", dropout},
          {"recurrent_dropout", recurrent_dropout},
          {"num_batchnorm", num_batchnorm},
          {"l2_lambda", l2_lambda},
          {"learning_rate", learning_rate},
          {"lr_decay", lr_decay},
          {"batch_size", batch_size},
          {"max_epochs", max_epochs},
          {"patience", patience},
          {"seed", seed},
          {"segment_length", segment_length},
          {"bn_momentum", bn_momentum},
          {"bn_epsilon", bn_epsilon}};
}

NetworkConfig NetworkConfig::from_json(const io::json& j) {
  NetworkConfig c;
  try {
    c.input_width = j.value("input_width", c.input_width);
    c.hidden_sizes = j.value("hidden_sizes", c.hidden_sizes);
    c.dropout = j.value("dropout", c.dropout);
    c.recurrent_dropout = j.value("recurrent_dropout", c.recurrent_dropout);
    c.num_batchnorm = j.value("num_batchnorm", c.num_batchnorm);
    c.l2_lambda = j.value("l2_lambda", c.l2_lambda);
    c.learning_rate = j.value("learning_rate", c.learning_rate);
    c.lr_decay = j.value("lr_decay", c.lr_decay);
    c.batch_size = j.value("batch_size", c.batch_size);
    c.max_epochs = j.value("max_epochs", c.max_epochs);
    c.patience = j.value("patience", c.patience);
    c.seed = j.value("seed", c.seed);
    c.segment_length = j.value("segment_length", c.segment_length);
    c.bn_momentum = j.value("bn_momentum", c.bn_momentum);
    c.bn_epsilon = j.value("bn_epsilon", c.bn_epsilon);
  } catch (const io::json::exception& e) {
    fail(ErrorKind::Format, std::string("malformed network config: ") + e.what());
  }
  c.validate();
  return c;
}

}  // namespace camseer::nn
