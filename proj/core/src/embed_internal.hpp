#pragma once

#include "ule/embedding.hpp"

namespace ule::detail {

TrainedEmbedding train_svd(const LikeCorpus& corpus, const EmbeddingConfig& config);
TrainedEmbedding train_lda_embedding(const LikeCorpus& corpus, const EmbeddingConfig& config);
TrainedEmbedding train_autoencoder(const LikeCorpus& corpus, const EmbeddingConfig& config);
TrainedEmbedding train_word2vec(const LikeCorpus& corpus, const EmbeddingConfig& config);
TrainedEmbedding train_glove(const LikeCorpus& corpus, const EmbeddingConfig& config);

}  // namespace ule::detail
