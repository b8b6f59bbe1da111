// Command godecls prints every top-level func declaration of the non-test Go
// files in one directory as JSON, using the standard go/parser. It is the
// reference the C++ declaration scanner is checked against.
package main

import (
	"encoding/json"
	"fmt"
	"go/ast"
	"go/parser"
	"go/token"
	"os"
	"path/filepath"
	"sort"
	"strings"
)

type decl struct {
	File     string `json:"file"`
	Name     string `json:"name"`
	Kind     string `json:"kind"`
	Receiver string `json:"receiver,omitempty"`
	Start    int    `json:"start"`
	End      int    `json:"end"`
	Params   int    `json:"params"`
	Returns  int    `json:"returns"`
}

func receiverName(e ast.Expr) string {
	switch t := e.(type) {
	case *ast.StarExpr:
		return receiverName(t.X)
	case *ast.Ident:
		return t.Name
	case *ast.IndexExpr:
		return receiverName(t.X)
	case *ast.IndexListExpr:
		return receiverName(t.X)
	}
	return ""
}

func count(fl *ast.FieldList) int {
	if fl == nil {
		return 0
	}
	n := 0
	for _, f := range fl.List {
		if len(f.Names) == 0 {
			n++
		} else {
			n += len(f.Names)
		}
	}
	return n
}

func main() {
	if len(os.Args) != 2 {
		fmt.Fprintln(os.Stderr, "usage: godecls DIR")
		os.Exit(2)
	}
	dir := os.Args[1]
	names, err := filepath.Glob(filepath.Join(dir, "*.go"))
	if err != nil {
		panic(err)
	}
	sort.Strings(names)
	out := []decl{}
	for _, path := range names {
		if strings.HasSuffix(path, "_test.go") {
			continue
		}
		fset := token.NewFileSet()
		f, err := parser.ParseFile(fset, path, nil, parser.ParseComments)
		if err != nil {
			fmt.Fprintln(os.Stderr, err)
			os.Exit(1)
		}
		for _, d := range f.Decls {
			fd, ok := d.(*ast.FuncDecl)
			if !ok {
				continue
			}
			rec := decl{
				File:    filepath.Base(path),
				Name:    fd.Name.Name,
				Kind:    "function",
				Start:   fset.Position(fd.Pos()).Offset,
				End:     fset.Position(fd.End()).Offset,
				Params:  count(fd.Type.Params),
				Returns: count(fd.Type.Results),
			}
			if fd.Recv != nil && len(fd.Recv.List) > 0 {
				rec.Kind = "method"
				rec.Receiver = receiverName(fd.Recv.List[0].Type)
			}
			out = append(out, rec)
		}
	}
	enc := json.NewEncoder(os.Stdout)
	enc.SetIndent("", "  ")
	if err := enc.Encode(out); err != nil {
		panic(err)
	}
}
