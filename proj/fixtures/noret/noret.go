// Package noret models a request context whose String method writes a
// response and returns nothing.
package noret

import "fmt"

// Context carries the response written by a handler.
// FIXTURE-DOC Context
type Context struct {
	Status int
	Body   string
}

// String writes the formatted body with the given status code.
// It does not return a value.
// FIXTURE-DOC String
func (c *Context) String(code int, format string, values ...any) {
	c.Status = code
	c.Body = fmt.Sprintf(format, values...)
}

// Reply answers with status 200 and msg as the body.
// FIXTURE-DOC Reply
func Reply(c *Context, msg string) {
	c.String(200, "%s", msg)
}
