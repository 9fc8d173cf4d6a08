/* C interface to the pylm language modeling toolkit.
 *
 * Models are opaque handles; functions return PylmStatus codes and record a
 * thread-local message retrievable with pylm_last_error(). Keep this header
 * in sync with src/lib.rs (checked by the header_parity test).
 */

#ifndef PYLM_H
#define PYLM_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum PylmStatus {
  PYLM_OK = 0,
  PYLM_ERR_NULL_ARGUMENT = 1,
  PYLM_ERR_UTF8 = 2,
  PYLM_ERR_IO = 3,
  PYLM_ERR_FORMAT = 4,
} PylmStatus;

/* Opaque handle to a loaded model. */
typedef struct PylmModel PylmModel;

/* Message for the most recent failure on this thread, or NULL. Valid until
 * the next failing call on the same thread. */
const char *pylm_last_error(void);

/* Version of the model file format this library reads. */
uint32_t pylm_format_version(void);

/* Loads a model file. On PYLM_OK, *out_model holds a handle owned by the
 * caller; release it with pylm_model_close(). */
PylmStatus pylm_model_open(const char *path, PylmModel **out_model);

/* Releases a handle. NULL is a no-op. */
void pylm_model_close(PylmModel *model);

/* n-gram order of the model (0 for NULL). */
uint32_t pylm_model_order(const PylmModel *model);

/* Vocabulary size including the special symbols (0 for NULL). */
uint64_t pylm_model_vocab_size(const PylmModel *model);

/* Static model family name: "mkn", "hpylm", or "hpylmc". */
const char *pylm_model_kind(const PylmModel *model);

/* Log2 probability of target after context_len context words. Contexts
 * shorter than order-1 are padded with the begin symbol; longer contexts
 * use their rightmost words. Unknown words map to the unknown symbol. */
PylmStatus pylm_score_ngram(const PylmModel *model, const char *const *context,
                            size_t context_len, const char *target,
                            double *out_log2p);

/* Total log2 probability of a whitespace-tokenized sentence, including the
 * end-symbol event. out_events (may be NULL) receives tokens + 1. */
PylmStatus pylm_score_sentence(const PylmModel *model, const char *sentence,
                               double *out_log2p, uint64_t *out_events);

#ifdef __cplusplus
}
#endif

#endif /* PYLM_H */
