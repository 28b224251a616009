#ifndef DUALSYS_H
#define DUALSYS_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#define DUALSYS_API __declspec(dllexport)
#else
#define DUALSYS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum dualsys_status {
  DUALSYS_OK = 0,
  DUALSYS_E_INVALID_ARGUMENT,
  DUALSYS_E_IO,
  DUALSYS_E_PARSE,
  DUALSYS_E_SCHEMA,
  DUALSYS_E_INFEASIBLE,
  DUALSYS_E_TRANSPORT,
  DUALSYS_E_AUTH,
  DUALSYS_E_RATE_LIMIT,
  DUALSYS_E_UNSCRIPTED,
  DUALSYS_E_EXHAUSTED,
  DUALSYS_E_EMPTY,
  DUALSYS_E_INTERNAL
} dualsys_status;

typedef enum dualsys_format { DUALSYS_FORMAT_MCQ = 0, DUALSYS_FORMAT_FTG = 1 } dualsys_format;

typedef struct dualsys_dataset dualsys_dataset;
typedef struct dualsys_endpoint dualsys_endpoint;
typedef struct dualsys_records dualsys_records;

/* Message for the last failing call on this thread; "" after success. */
DUALSYS_API const char* dualsys_last_error(void);
/* "io", "parse", ... */
DUALSYS_API const char* dualsys_status_name(dualsys_status status);
DUALSYS_API const char* dualsys_version(void);
/* Strings returned through char** out-parameters are released here. */
DUALSYS_API void dualsys_string_free(char* s);

/* ---- datasets ---------------------------------------------------------- */

/* kind may be NULL to accept any dataset. */
DUALSYS_API dualsys_status dualsys_dataset_load(const char* path, const char* kind, dualsys_dataset** out);
DUALSYS_API dualsys_status dualsys_dataset_save(const dualsys_dataset* ds, const char* path);
DUALSYS_API size_t dualsys_dataset_size(const dualsys_dataset* ds);
/* JSON line of instance i. */
DUALSYS_API dualsys_status dualsys_dataset_instance_json(const dualsys_dataset* ds, size_t i, char** out);
/* Number of malformed instances; *report lists them (may be NULL). */
DUALSYS_API dualsys_status dualsys_dataset_validate(const dualsys_dataset* ds, size_t* invalid, char** report);
/* mcq -> ftg; visual instances fail. */
DUALSYS_API dualsys_status dualsys_dataset_to_ftg(dualsys_dataset* ds);
DUALSYS_API void dualsys_dataset_free(dualsys_dataset* ds);

/* config may be NULL for a cycle over all seven configurations. */
DUALSYS_API dualsys_status dualsys_gen_raven(const char* config, size_t count, uint64_t seed, dualsys_format format,
                                             dualsys_dataset** out);
/* data_dir NULL: $DUALSYS_DATA_DIR, then the installed data directory. */
DUALSYS_API dualsys_status dualsys_gen_salt(const char* data_dir, size_t count, uint64_t seed, dualsys_format format,
                                            dualsys_dataset** out);
DUALSYS_API dualsys_status dualsys_gen_listfn(const char* data_dir, size_t count, size_t shots, uint64_t seed,
                                              dualsys_format format, dualsys_dataset** out);
/* kind "ekar" or "vasr"; reads the upstream release file. */
DUALSYS_API dualsys_status dualsys_ingest(const char* kind, const char* path, dualsys_format format,
                                          dualsys_dataset** out);
/* Sets difficulty from the vector file; kind selects thresholds ("ekar"/"vasr"). */
DUALSYS_API dualsys_status dualsys_annotate(dualsys_dataset* ds, const char* vectors_path, const char* kind);

/* ---- endpoints --------------------------------------------------------- */

/* table_json: {"endpoints": {...}}. cache_dir may be NULL. */
DUALSYS_API dualsys_status dualsys_endpoint_open(const char* table_json, const char* name, const char* cache_dir,
                                                 dualsys_endpoint** out);
DUALSYS_API dualsys_status dualsys_endpoint_scripted(const char* transcript_path, const char* cache_dir,
                                                     dualsys_endpoint** out);
/* Validates an endpoint table without opening connections. */
DUALSYS_API dualsys_status dualsys_endpoint_table_check(const char* table_json, size_t* count);
DUALSYS_API void dualsys_endpoint_free(dualsys_endpoint* ep);

/* ---- runs -------------------------------------------------------------- */

typedef struct dualsys_run_options {
  const char* pipeline; /* induction|automatic|abd_ded|selection|refinement|adaptive|gold_deduction */
  int k;
  int rounds;
  const char* budget; /* low|high */
  int dummy_tokens;
  uint64_t seed;
  int parallelism;
  const char* timestamp; /* copied into every record; may be NULL */
  int max_output_tokens;
} dualsys_run_options;

DUALSYS_API void dualsys_run_options_init(dualsys_run_options* opts);
DUALSYS_API dualsys_status dualsys_run_options_check(const dualsys_run_options* opts);
DUALSYS_API dualsys_status dualsys_run(const dualsys_dataset* ds, dualsys_endpoint* ep,
                                       const dualsys_run_options* opts, dualsys_records** out);

DUALSYS_API dualsys_status dualsys_records_load(const char* path, dualsys_records** out);
DUALSYS_API dualsys_status dualsys_records_append(const dualsys_records* recs, const char* path, size_t* written);
/* Re-scores every record; *correct may be NULL. */
DUALSYS_API dualsys_status dualsys_records_score(dualsys_records* recs, size_t* correct);
DUALSYS_API size_t dualsys_records_size(const dualsys_records* recs);
DUALSYS_API dualsys_status dualsys_records_record_json(const dualsys_records* recs, size_t i, char** out);
DUALSYS_API void dualsys_records_free(dualsys_records* recs);

/* format "csv" or "text"; token_measure "completion" (default), "prompt", "total". */
DUALSYS_API dualsys_status dualsys_report(const dualsys_records* recs, const char* format, const char* token_measure,
                                          char** out);
/* Abduction and deduction accuracy (percent) over paired list-function runs. */
DUALSYS_API dualsys_status dualsys_decoupled(const dualsys_records* abduction, const dualsys_records* deduction,
                                             const char* data_dir, uint64_t seed, double* abduction_acc,
                                             double* deduction_acc);

DUALSYS_API dualsys_status dualsys_system2_advantage(double acc_sys2, double acc_induction, double* out);

#ifdef __cplusplus
}
#endif

#endif
