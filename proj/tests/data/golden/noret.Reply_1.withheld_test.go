package noret

import "testing"

func TestReply(t *testing.T) {
	c := &Context{}
	Reply(c, "hi")
	if c.Status != 200 {
		t.Fatalf("Status = %d", c.Status)
	}
	got := c.String(201, "%s", "x")
	if got != "x" {
		t.Errorf("String = %q", got)
	}
}
