#ifndef WEFT_H
#define WEFT_H

/* This file is generated by cbindgen from weft-ffi; do not edit by hand. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/*
 Result codes for C ABI calls.
 */
typedef enum WeftStatus {
  WEFT_STATUS_OK = 0,
  /*
   A required pointer argument was NULL.
   */
  WEFT_STATUS_NULL_ARGUMENT = 1,
  /*
   A string argument was not valid UTF-8.
   */
  WEFT_STATUS_INVALID_UTF8 = 2,
  /*
   A property key without a recognised namespace prefix.
   */
  WEFT_STATUS_INVALID_KEY = 3,
  /*
   The file could not be read.
   */
  WEFT_STATUS_IO_ERROR = 4,
  /*
   The file or request data was malformed.
   */
  WEFT_STATUS_PARSE_ERROR = 5,
  /*
   Token resolution failed while rendering.
   */
  WEFT_STATUS_RENDER_ERROR = 6,
} WeftStatus;

/*
 Request kinds accepted by `weft_parse_request`.
 */
typedef enum WeftMethod {
  WEFT_METHOD_GET = 0,
  WEFT_METHOD_POST = 1,
} WeftMethod;

/*
 Opaque property-map handle.
 */
typedef struct WeftProps WeftProps;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the most recent failure on this thread. The pointer stays
 valid until the next failing call on the same thread; do not free it.
 */
const char *weft_last_error(void);

/*
 The library version as a static string; do not free it.
 */
const char *weft_version(void);

/*
 Creates an empty property map.
 */
struct WeftProps *weft_props_new(void);

/*
 Destroys a property map. NULL is ignored.

 # Safety
 `props` must have come from `weft_props_new` and not be freed twice.
 */
void weft_props_free(struct WeftProps *props);

/*
 Binds `key` to `value`. Keys must carry one of the namespace prefixes
 `CONFIG.`, `FORM.`, `VAR.`, `ERROR.`, `SERIAL.`.

 # Safety
 `props` must be a live handle; `key` and `value` must be valid
 NUL-terminated strings.
 */
enum WeftStatus weft_props_set(struct WeftProps *props, const char *key, const char *value);

/*
 Looks up `key`, returning a new string or NULL when the key is absent.
 Absence does not set an error.

 # Safety
 `props` must be a live handle; `key` must be a valid NUL-terminated
 string.
 */
char *weft_props_get(const struct WeftProps *props, const char *key);

/*
 Removes `key`; removing an absent key is a no-op.

 # Safety
 `props` must be a live handle; `key` must be a valid NUL-terminated
 string.
 */
enum WeftStatus weft_props_unset(struct WeftProps *props, const char *key);

/*
 Number of entries in the map.

 # Safety
 `props` must be a live handle or NULL (NULL counts as empty).
 */
size_t weft_props_len(const struct WeftProps *props);

/*
 Parses a config file into the map under `CONFIG.`.

 # Safety
 `props` must be a live handle; `path` must be a valid NUL-terminated
 string.
 */
enum WeftStatus weft_config_parse(struct WeftProps *props, const char *path);

/*
 Parses a config file into the map under an arbitrary prefix (given bare,
 e.g. `"ERROR"`).

 # Safety
 `props` must be a live handle; `path` and `prefix` must be valid
 NUL-terminated strings.
 */
enum WeftStatus weft_config_parse_bare(struct WeftProps *props,
                                       const char *path,
                                       const char *prefix);

/*
 Decodes query-string or form-body data into `FORM.` entries: `data` is
 the query string for GET and the urlencoded body for POST.

 # Safety
 `props` must be a live handle; `data` must be a valid NUL-terminated
 string.
 */
enum WeftStatus weft_parse_request(struct WeftProps *props,
                                   enum WeftMethod method,
                                   const char *data);

/*
 Processes one line of template text: `[[token]]` markup is replaced with
 the first binding among `VAR.`, `FORM.`, `CONFIG.`, everything else is
 copied through. Returns a new string, or NULL on failure.

 # Safety
 `props` must be a live handle; `line` must be a valid NUL-terminated
 string.
 */
char *weft_process_line(struct WeftProps *props, const char *line);

/*
 Processes a template file line by line. Returns the processed text, or
 NULL on failure.

 # Safety
 `props` must be a live handle; `path` must be a valid NUL-terminated
 string.
 */
char *weft_render_file(struct WeftProps *props, const char *path);

/*
 Processes a list file (`name=value` lines with tokens) into a form
 encoded query string joined with `&`. Returns a new string, or NULL on
 failure.

 # Safety
 `props` must be a live handle; `path` must be a valid NUL-terminated
 string.
 */
char *weft_render_list_file(struct WeftProps *props, const char *path);

/*
 Form encodes a string: space to `+`, the unreserved set unchanged, all
 other bytes as uppercase `%HH`. Returns a new string.

 # Safety
 `text` must be a valid NUL-terminated string.
 */
char *weft_form_encode(const char *text);

/*
 Reverses `weft_form_encode` (permissive on malformed escapes). Returns a
 new string.

 # Safety
 `text` must be a valid NUL-terminated string.
 */
char *weft_form_decode(const char *text);

/*
 Releases a string returned by this library. NULL is ignored.

 # Safety
 `text` must have been returned by a weft function and not freed before.
 */
void weft_string_free(char *text);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WEFT_H */
