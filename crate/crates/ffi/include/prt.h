#ifndef PRT_H
#define PRT_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum PrtStatus {
  PRT_STATUS_OK = 0,
  PRT_STATUS_NULL_POINTER = 1,
  PRT_STATUS_INVALID_ARGUMENT = 2,
  PRT_STATUS_PARSE = 3,
  PRT_STATUS_DEPTH_EXHAUSTED = 4,
  PRT_STATUS_INSTANCE_TOO_LARGE = 5,
  PRT_STATUS_FAILED = 6,
  PRT_STATUS_PANIC = 7,
} PrtStatus;

/**
 * Opaque almost antichain together with its host.
 */
typedef struct PrtAntichain PrtAntichain;

/**
 * Opaque diary catalog.
 */
typedef struct PrtCatalog PrtCatalog;

/**
 * Opaque coding tree.
 */
typedef struct PrtCodingTree PrtCodingTree;

/**
 * Opaque canonical diary.
 */
typedef struct PrtDiary PrtDiary;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or NULL. Valid until the next
 * failing call on the same thread.
 */
const char *prt_last_error(void);

/**
 * Releases a string returned by this library.
 *
 * # Safety
 * `s` must be NULL or a string returned by this library, not yet freed.
 */
void prt_string_free(char *s);

/**
 * Generates a coding tree of the given depth. Without a seed the canonical
 * scheduler is used.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PrtStatus prt_coding_tree_generate(size_t depth,
                                        bool has_seed,
                                        uint64_t seed,
                                        struct PrtCodingTree **out);

/**
 * Parses a coding tree from its text form.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PrtStatus prt_coding_tree_from_text(const char *text, struct PrtCodingTree **out);

/**
 * Depth of the tree.
 *
 * # Safety
 * `tree` and `out` must be valid pointers.
 */
enum PrtStatus prt_coding_tree_depth(const struct PrtCodingTree *tree, size_t *out);

/**
 * Writes the `n`-th coding node as a digit string (`-` for the root).
 *
 * # Safety
 * `tree` and `out` must be valid pointers.
 */
enum PrtStatus prt_coding_tree_coding_node(const struct PrtCodingTree *tree, size_t n, char **out);

/**
 * Serializes the tree to text.
 *
 * # Safety
 * `tree` and `out` must be valid pointers.
 */
enum PrtStatus prt_coding_tree_to_text(const struct PrtCodingTree *tree, char **out);

/**
 * # Safety
 * `tree` must be NULL or a handle from this library, not yet freed.
 */
void prt_coding_tree_free(struct PrtCodingTree *tree);

/**
 * Builds a guided almost antichain with `levels` levels.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum PrtStatus prt_antichain_build(size_t levels,
                                   bool has_seed,
                                   uint64_t seed,
                                   struct PrtAntichain **out);

/**
 * Number of levels.
 *
 * # Safety
 * `a` and `out` must be valid pointers.
 */
enum PrtStatus prt_antichain_len(const struct PrtAntichain *a, size_t *out);

/**
 * Checks every level of the antichain; `out` is set to whether all pass.
 *
 * # Safety
 * `a` and `out` must be valid pointers.
 */
enum PrtStatus prt_antichain_audit(const struct PrtAntichain *a, bool *out);

/**
 * Serializes the antichain to text.
 *
 * # Safety
 * `a` and `out` must be valid pointers.
 */
enum PrtStatus prt_antichain_to_text(const struct PrtAntichain *a, char **out);

/**
 * # Safety
 * `a` must be NULL or a handle from this library, not yet freed.
 */
void prt_antichain_free(struct PrtAntichain *a);

/**
 * Classifies the chain formed by the antichain coding nodes at the given
 * level indices.
 *
 * # Safety
 * `a` and `out` must be valid pointers; `indices` must point to `count`
 * values.
 */
enum PrtStatus prt_diary_classify(const struct PrtAntichain *a,
                                  const size_t *indices,
                                  size_t count,
                                  struct PrtDiary **out);

/**
 * Parses a diary from its text form.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PrtStatus prt_diary_from_text(const char *text, struct PrtDiary **out);

/**
 * Height (number of levels) of the diary.
 *
 * # Safety
 * `d` and `out` must be valid pointers.
 */
enum PrtStatus prt_diary_height(const struct PrtDiary *d, size_t *out);

/**
 * Case number 1..=7 of a 2-chain diary, or 0 for any other diary.
 *
 * # Safety
 * `d` and `out` must be valid pointers.
 */
enum PrtStatus prt_diary_two_chain_id(const struct PrtDiary *d, uint32_t *out);

/**
 * Serializes the diary to text.
 *
 * # Safety
 * `d` and `out` must be valid pointers.
 */
enum PrtStatus prt_diary_to_text(const struct PrtDiary *d, char **out);

/**
 * # Safety
 * `d` must be NULL or a handle from this library, not yet freed.
 */
void prt_diary_free(struct PrtDiary *d);

/**
 * Catalog of `p`-chain diaries realized among the first `levels` antichain
 * coding nodes. With `brute_force` every chain is classified; otherwise
 * diaries are enumerated from the axioms and filtered for realizability.
 *
 * # Safety
 * `a` and `out` must be valid pointers.
 */
enum PrtStatus prt_catalog_build(const struct PrtAntichain *a,
                                 size_t p,
                                 size_t levels,
                                 bool brute_force,
                                 struct PrtCatalog **out);

/**
 * Parses a catalog from its text form.
 *
 * # Safety
 * `text` must be a NUL-terminated string and `out` a valid pointer.
 */
enum PrtStatus prt_catalog_from_text(const char *text, struct PrtCatalog **out);

/**
 * Number of diaries in the catalog.
 *
 * # Safety
 * `c` and `out` must be valid pointers.
 */
enum PrtStatus prt_catalog_len(const struct PrtCatalog *c, size_t *out);

/**
 * Sets `out` to whether two catalogs contain the same diaries.
 *
 * # Safety
 * All pointers must be valid.
 */
enum PrtStatus prt_catalog_equal(const struct PrtCatalog *a, const struct PrtCatalog *b, bool *out);

/**
 * Serializes the catalog to text.
 *
 * # Safety
 * `c` and `out` must be valid pointers.
 */
enum PrtStatus prt_catalog_to_text(const struct PrtCatalog *c, char **out);

/**
 * # Safety
 * `c` must be NULL or a handle from this library, not yet freed.
 */
void prt_catalog_free(struct PrtCatalog *c);

#ifdef __cplusplus
} // extern "C"
#endif // __cplusplus

#endif /* PRT_H */
