#ifndef MTG_H
#define MTG_H

/* C interface to the task-grouping library: datasets (genomic ingest and the
 * synthetic generator), joint and per-group training, task embeddings,
 * clustering, scoring, and report bundles.
 *
 * Conventions:
 *   - every fallible call returns mtg_status; MTG_OK is 0
 *   - on failure, mtg_last_error() describes what went wrong (per thread)
 *   - handles are created through out-parameters and released with the
 *     matching *_free; freeing NULL is a no-op
 *   - numeric accessors return -1 (counts/indices) or NaN (values) when the
 *     query itself is invalid, and set the thread error message
 *   - strings returned through char** out-parameters are owned by the caller
 *     and released with mtg_string_free; const char* returns are borrowed
 *     and valid while the handle lives
 */

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mtg_status {
  MTG_OK = 0,
  MTG_ERR_INVALID_ARGUMENT = 1,
  MTG_ERR_SHAPE_MISMATCH = 2,
  MTG_ERR_STATE = 3,
  MTG_ERR_IO = 4,
  MTG_ERR_PARSE = 5,
  MTG_ERR_NUMERIC = 6,
  MTG_ERR_DIGEST_MISMATCH = 7,
  MTG_ERR_INTERNAL = 8
} mtg_status;

const char* mtg_version(void);
const char* mtg_status_name(mtg_status s);

/* Message from the most recent failing call on the calling thread; the empty
 * string until something fails. The pointer stays valid until the next
 * failure on the same thread. */
const char* mtg_last_error(void);

void mtg_string_free(char* s);

/* SHA-256 of a file's bytes as lowercase hex; out65 receives 64 characters
 * plus a terminating NUL. */
mtg_status mtg_sha256_file(const char* path, char out65[65]);

typedef struct mtg_dataset mtg_dataset;
typedef struct mtg_model mtg_model;
typedef struct mtg_embedding mtg_embedding;
typedef struct mtg_grouping mtg_grouping;
typedef struct mtg_scores mtg_scores;

enum { MTG_SPLIT_TRAIN = 0, MTG_SPLIT_VALIDATION = 1, MTG_SPLIT_TEST = 2 };

/* ---- datasets ----------------------------------------------------------- */

/* Generates a labeled synthetic dataset with planted task groups. config_json
 * holds the generator settings (any subset of the defaults, e.g. {"groups":4,
 * "tasks_per_group":6,"seq_length":201,"num_examples":20000,"seed":7}). */
mtg_status mtg_dataset_synth(const char* config_json, mtg_dataset** out);

/* Tiles a genome into fixed bins, labels each bin per task by peak overlap,
 * keeps bins with at least one positive task, and splits by region: the
 * chromosomes in test_chroms_csv (comma separated) go to test, bins of
 * validation_chrom with start in [validation_begin, validation_end) go to
 * validation, everything else to train. manifest_tsv lists one task per row:
 * task_id, BED path, optional key=value;key=value metadata. */
mtg_status mtg_dataset_ingest(const char* genome_fasta, const char* manifest_tsv,
                              int bin, int window, int min_overlap,
                              const char* test_chroms_csv, const char* validation_chrom,
                              int64_t validation_begin, int64_t validation_end,
                              mtg_dataset** out);

mtg_status mtg_dataset_load(const char* path, mtg_dataset** out);
mtg_status mtg_dataset_save(const mtg_dataset* ds, const char* path);
void mtg_dataset_free(mtg_dataset* ds);

int32_t mtg_dataset_num_tasks(const mtg_dataset* ds);
int64_t mtg_dataset_num_examples(const mtg_dataset* ds);
int32_t mtg_dataset_window_length(const mtg_dataset* ds);
const char* mtg_dataset_task_id(const mtg_dataset* ds, int32_t task);
int32_t mtg_dataset_task_index(const mtg_dataset* ds, const char* task_id);
/* value of one metadata key for one task; NULL when the key is absent */
const char* mtg_dataset_task_metadata(const mtg_dataset* ds, int32_t task, const char* key);
int64_t mtg_dataset_split_count(const mtg_dataset* ds, int32_t split);
int64_t mtg_dataset_positive_count(const mtg_dataset* ds, int32_t task, int32_t split);

/* ---- training ----------------------------------------------------------- */

/* Trains one shared trunk with one output head per listed task (indices into
 * the dataset's task list). model_spec_json fixes the architecture, e.g.
 * {"input_length":201,"blocks":[{"filters":32,"width":8,"pool":4}],
 *  "head_hidden":32}; "num_tasks" is inferred from the task list.
 * training_config_json takes any subset of {"batch_size","max_steps",
 * "validate_every","patience","learning_rate","seed","threads"}; a
 * learning_rate of 0 selects it by grid search on validation loss. The run
 * seed is derived from the configured seed plus the sorted task id list, so
 * a head's stream does not depend on which other tasks ride along.
 * out_log_tsv (optional) receives the validation trace. */
mtg_status mtg_train(const mtg_dataset* ds, const char* model_spec_json,
                     const char* training_config_json, const int32_t* tasks,
                     int32_t num_tasks, mtg_model** out_model, char** out_log_tsv);

/* Trains one model per group of the partition, scheduled across `workers`
 * threads. out_models receives an array of num_groups handles, in group
 * order; release with mtg_model_array_free. */
mtg_status mtg_train_groups(const mtg_dataset* ds, const char* model_spec_json,
                            const char* training_config_json, const mtg_grouping* grouping,
                            int32_t workers, mtg_model*** out_models, int32_t* out_count);
void mtg_model_array_free(mtg_model** models, int32_t count);

/* ---- models ------------------------------------------------------------- */

mtg_status mtg_model_save(const mtg_model* m, const char* path);
mtg_status mtg_model_load(const char* path, mtg_model** out);
void mtg_model_free(mtg_model* m);

int32_t mtg_model_num_heads(const mtg_model* m);
const char* mtg_model_task_id(const mtg_model* m, int32_t head);
mtg_status mtg_model_spec_json(const mtg_model* m, char** out_json);

/* ---- task embeddings ---------------------------------------------------- */

/* One row per head: that head's final-layer weight vector. */
mtg_status mtg_embed(const mtg_model* m, mtg_embedding** out);

mtg_status mtg_embedding_load_tsv(const char* path, mtg_embedding** out);
mtg_status mtg_embedding_save_tsv(const mtg_embedding* e, const char* path);
void mtg_embedding_free(mtg_embedding* e);

int32_t mtg_embedding_num_tasks(const mtg_embedding* e);
int32_t mtg_embedding_dims(const mtg_embedding* e);
double mtg_embedding_value(const mtg_embedding* e, int32_t task, int32_t dim);
const char* mtg_embedding_task_id(const mtg_embedding* e, int32_t task);

/* Scales every row to unit L2 norm, in place. All-zero rows are left alone.
 * Off by default everywhere; clustering consumes raw rows unless asked. */
mtg_status mtg_embedding_normalize_rows(mtg_embedding* e);

/* PCA of the rows; writes component loadings and per-task projections as two
 * TSV files. n_components must be in [1, min(tasks, dims)]. */
mtg_status mtg_embedding_pca(const mtg_embedding* e, int32_t n_components,
                             const char* components_tsv, const char* projections_tsv);

/* ---- clustering --------------------------------------------------------- */

/* Partitions the embedding rows. algo is one of "kmeans", "ward", "spectral",
 * "dbscan", "ssc". params_json holds the algorithm's settings; unknown keys
 * are rejected so typos cannot silently fall back to defaults.
 *   kmeans:   {"k":4, "seed":0, "restarts":20, "max_iters":200}  (k required)
 *   ward:     {"k":4}                                            (k required)
 *   spectral: {"k":4, "seed":0}                                  (k required)
 *   dbscan:   {"eps":0.5, "min_pts":3}               (eps, min_pts required)
 *   ssc:      {"k":4, "seed":0, "lambda":0.1, "tol":1e-8, "max_sweeps":10000}
 * DBSCAN chooses its own group count; noise points become singletons. */
mtg_status mtg_cluster(const mtg_embedding* e, const char* algo, const char* params_json,
                       mtg_grouping** out);

/* Groups tasks by the value of one metadata key (every task must carry it). */
mtg_status mtg_cluster_metadata(const mtg_dataset* ds, const char* key, mtg_grouping** out);

mtg_status mtg_grouping_singletons(int32_t num_tasks, mtg_grouping** out);
mtg_status mtg_grouping_all_in_one(int32_t num_tasks, mtg_grouping** out);

mtg_status mtg_grouping_load_tsv(const char* path, mtg_grouping** out);
mtg_status mtg_grouping_save_tsv(const mtg_grouping* g, const char* path);
void mtg_grouping_free(mtg_grouping* g);

int32_t mtg_grouping_num_tasks(const mtg_grouping* g);
int32_t mtg_grouping_num_groups(const mtg_grouping* g);
int32_t mtg_grouping_assignment(const mtg_grouping* g, int32_t task);
const char* mtg_grouping_task_id(const mtg_grouping* g, int32_t task);
const char* mtg_grouping_algorithm(const mtg_grouping* g);
double mtg_grouping_objective(const mtg_grouping* g);

/* Chance-corrected agreement between two labelings of the same n items;
 * 1 for identical partitions, near 0 for independent ones. */
mtg_status mtg_adjusted_rand_index(const int32_t* a, const int32_t* b, int32_t n,
                                   double* out);

/* ---- evaluation --------------------------------------------------------- */

/* Per-task F1 (plus precision/recall and the confusion counts) of a model's
 * heads on one split. `method` labels the rows, e.g. "STL" or "KMTL k=4".
 * Predictions are probability >= threshold. */
mtg_status mtg_evaluate(const mtg_model* m, const mtg_dataset* ds, int32_t split,
                        const char* method, double threshold, int32_t threads,
                        mtg_scores** out);

/* Concatenates per-group score sets into one method-level set. */
mtg_status mtg_scores_merge(const char* method, const mtg_scores* const* parts,
                            int32_t count, mtg_scores** out);

mtg_status mtg_scores_load_tsv(const char* path, mtg_scores** out);
mtg_status mtg_scores_save_tsv(const mtg_scores* s, const char* path);
void mtg_scores_free(mtg_scores* s);

int32_t mtg_scores_num_tasks(const mtg_scores* s);
const char* mtg_scores_task_id(const mtg_scores* s, int32_t i);
double mtg_scores_f1(const mtg_scores* s, int32_t i);
double mtg_scores_mean_f1(const mtg_scores* s);
const char* mtg_scores_method(const mtg_scores* s);

/* ---- reports ------------------------------------------------------------ */

/* Writes scores.tsv, pairwise.tsv, summary.json, and (when baseline_method
 * is non-empty) improvement.tsv into dir. All sets must cover the same tasks.
 * When strata_key is non-NULL, per-stratum improvement rows are taken from
 * that metadata key of ds; ds may be NULL otherwise. Output bytes depend
 * only on the inputs. */
mtg_status mtg_report(const char* dir, const mtg_scores* const* sets, int32_t count,
                      const char* baseline_method, const mtg_dataset* ds,
                      const char* strata_key);

#ifdef __cplusplus
}
#endif

#endif /* MTG_H */
