// Command ratg-golsp is a small Go language server that answers
// textDocument/definition and textDocument/hover over stdio. It stands in for
// gopls where gopls is not installed: resolution uses go/parser and go/types
// from the standard library, with a name-based fallback for code that does not
// parse or type-check yet.
package main

import (
	"bufio"
	"encoding/json"
	"fmt"
	"go/ast"
	"go/importer"
	"go/parser"
	"go/token"
	"go/types"
	"io"
	"net/url"
	"os"
	"path/filepath"
	"sort"
	"strconv"
	"strings"
	"unicode"
	"unicode/utf8"
)

type message struct {
	JSONRPC string           `json:"jsonrpc"`
	ID      *json.RawMessage `json:"id,omitempty"`
	Method  string           `json:"method,omitempty"`
	Params  json.RawMessage  `json:"params,omitempty"`
	Result  json.RawMessage  `json:"result,omitempty"`
	Error   json.RawMessage  `json:"error,omitempty"`
}

type position struct {
	Line      int `json:"line"`
	Character int `json:"character"`
}

type lspRange struct {
	Start position `json:"start"`
	End   position `json:"end"`
}

type location struct {
	URI   string   `json:"uri"`
	Range lspRange `json:"range"`
}

type textDocumentPositionParams struct {
	TextDocument struct {
		URI string `json:"uri"`
	} `json:"textDocument"`
	Position position `json:"position"`
}

type server struct {
	out      *bufio.Writer
	overlays map[string]string // path -> text
	fset     *token.FileSet
	imp      types.Importer
	nextID   int
}

func main() {
	s := &server{
		out:      bufio.NewWriter(os.Stdout),
		overlays: map[string]string{},
		fset:     token.NewFileSet(),
	}
	s.imp = importer.ForCompiler(s.fset, "source", nil)
	in := bufio.NewReader(os.Stdin)
	for {
		body, err := readMessage(in)
		if err != nil {
			if err == io.EOF {
				os.Exit(1)
			}
			fmt.Fprintln(os.Stderr, "ratg-golsp:", err)
			os.Exit(1)
		}
		var msg message
		if err := json.Unmarshal(body, &msg); err != nil {
			fmt.Fprintln(os.Stderr, "ratg-golsp: bad json:", err)
			continue
		}
		s.handle(&msg)
	}
}

func readMessage(r *bufio.Reader) ([]byte, error) {
	length := -1
	for {
		line, err := r.ReadString('\n')
		if err != nil {
			return nil, err
		}
		line = strings.TrimRight(line, "\r\n")
		if line == "" {
			break
		}
		if k, v, ok := strings.Cut(line, ":"); ok && strings.EqualFold(strings.TrimSpace(k), "Content-Length") {
			n, err := strconv.Atoi(strings.TrimSpace(v))
			if err != nil {
				return nil, err
			}
			length = n
		}
	}
	if length < 0 {
		return nil, fmt.Errorf("missing Content-Length")
	}
	buf := make([]byte, length)
	_, err := io.ReadFull(r, buf)
	return buf, err
}

func (s *server) send(v any) {
	body, _ := json.Marshal(v)
	fmt.Fprintf(s.out, "Content-Length: %d\r\n\r\n", len(body))
	s.out.Write(body)
	s.out.Flush()
}

func (s *server) reply(id *json.RawMessage, result any) {
	s.send(map[string]any{"jsonrpc": "2.0", "id": id, "result": result})
}

func (s *server) replyError(id *json.RawMessage, code int, text string) {
	s.send(map[string]any{"jsonrpc": "2.0", "id": id, "error": map[string]any{"code": code, "message": text}})
}

func (s *server) handle(msg *message) {
	if msg.Method == "" {
		return // a response to one of our own requests
	}
	switch msg.Method {
	case "initialize":
		s.reply(msg.ID, map[string]any{
			"capabilities": map[string]any{
				"textDocumentSync":   map[string]any{"openClose": true, "change": 1},
				"definitionProvider": true,
				"hoverProvider":      true,
			},
			"serverInfo": map[string]any{"name": "ratg-golsp", "version": "0.1.0"},
		})
	case "initialized":
		// gopls asks for configuration at this point; do the same so clients
		// exercise their server-request handling.
		s.nextID++
		s.send(map[string]any{"jsonrpc": "2.0", "id": s.nextID, "method": "workspace/configuration",
			"params": map[string]any{"items": []any{map[string]any{"section": "gopls"}}}})
		s.send(map[string]any{"jsonrpc": "2.0", "method": "window/logMessage",
			"params": map[string]any{"type": 3, "message": "ratg-golsp ready"}})
	case "textDocument/didOpen":
		var p struct {
			TextDocument struct {
				URI  string `json:"uri"`
				Text string `json:"text"`
			} `json:"textDocument"`
		}
		json.Unmarshal(msg.Params, &p)
		s.overlays[uriToPath(p.TextDocument.URI)] = p.TextDocument.Text
	case "textDocument/didChange":
		var p struct {
			TextDocument struct {
				URI string `json:"uri"`
			} `json:"textDocument"`
			ContentChanges []struct {
				Text string `json:"text"`
			} `json:"contentChanges"`
		}
		json.Unmarshal(msg.Params, &p)
		if n := len(p.ContentChanges); n > 0 {
			s.overlays[uriToPath(p.TextDocument.URI)] = p.ContentChanges[n-1].Text
		}
	case "textDocument/didClose":
		var p struct {
			TextDocument struct {
				URI string `json:"uri"`
			} `json:"textDocument"`
		}
		json.Unmarshal(msg.Params, &p)
		delete(s.overlays, uriToPath(p.TextDocument.URI))
	case "textDocument/definition":
		var p textDocumentPositionParams
		json.Unmarshal(msg.Params, &p)
		res := s.resolve(uriToPath(p.TextDocument.URI), p.Position)
		if res == nil {
			s.reply(msg.ID, nil)
			return
		}
		s.reply(msg.ID, []location{res.loc})
	case "textDocument/hover":
		var p textDocumentPositionParams
		json.Unmarshal(msg.Params, &p)
		res := s.resolve(uriToPath(p.TextDocument.URI), p.Position)
		if res == nil {
			s.reply(msg.ID, nil)
			return
		}
		value := "```go\n" + res.signature + "\n```"
		if res.doc != "" {
			value += "\n\n" + res.doc
		}
		s.reply(msg.ID, map[string]any{"contents": map[string]any{"kind": "markdown", "value": value}})
	case "shutdown":
		s.reply(msg.ID, nil)
	case "exit":
		os.Exit(0)
	default:
		if msg.ID != nil {
			s.replyError(msg.ID, -32601, "method not found: "+msg.Method)
		}
	}
}

func uriToPath(uri string) string {
	u, err := url.Parse(uri)
	if err != nil || u.Scheme != "file" {
		return uri
	}
	return filepath.Clean(u.Path)
}

func pathToURI(path string) string {
	return (&url.URL{Scheme: "file", Path: path}).String()
}

func (s *server) readFile(path string) ([]byte, error) {
	if text, ok := s.overlays[path]; ok {
		return []byte(text), nil
	}
	return os.ReadFile(path)
}

// offsetOf converts an LSP position (UTF-16 columns) to a byte offset.
func offsetOf(src []byte, pos position) int {
	line := 0
	i := 0
	for i < len(src) && line < pos.Line {
		if src[i] == '\n' {
			line++
		}
		i++
	}
	units := 0
	for i < len(src) && src[i] != '\n' && units < pos.Character {
		r, size := utf8.DecodeRune(src[i:])
		if r >= 0x10000 {
			units += 2
		} else {
			units++
		}
		i += size
	}
	return i
}

func positionOf(src []byte, offset int) position {
	line, start := 0, 0
	for i := 0; i < offset && i < len(src); i++ {
		if src[i] == '\n' {
			line++
			start = i + 1
		}
	}
	units := 0
	for i := start; i < offset && i < len(src); {
		r, size := utf8.DecodeRune(src[i:])
		if r >= 0x10000 {
			units += 2
		} else {
			units++
		}
		i += size
	}
	return position{Line: line, Character: units}
}

type resolution struct {
	loc       location
	signature string
	doc       string
}

type parsedFile struct {
	path string
	src  []byte
	file *ast.File
}

// loadPackage parses every Go file in dir that belongs to the same package as
// target, preferring open-document contents over disk.
func (s *server) loadPackage(target string) ([]*parsedFile, *parsedFile) {
	dir := filepath.Dir(target)
	names, _ := filepath.Glob(filepath.Join(dir, "*.go"))
	seen := map[string]bool{}
	for _, n := range names {
		seen[filepath.Clean(n)] = true
	}
	for p := range s.overlays {
		if filepath.Dir(p) == dir {
			seen[p] = true
		}
	}
	paths := make([]string, 0, len(seen))
	for p := range seen {
		paths = append(paths, p)
	}
	sort.Strings(paths)

	var files []*parsedFile
	var targetFile *parsedFile
	pkgName := ""
	for _, p := range paths {
		src, err := s.readFile(p)
		if err != nil {
			continue
		}
		f, _ := parser.ParseFile(s.fset, p, src, parser.ParseComments|parser.AllErrors)
		if f == nil || f.Name == nil {
			continue
		}
		pf := &parsedFile{path: p, src: src, file: f}
		if p == target {
			targetFile = pf
			pkgName = f.Name.Name
		}
		files = append(files, pf)
	}
	if targetFile == nil {
		return nil, nil
	}
	var same []*parsedFile
	for _, pf := range files {
		if pf.file.Name.Name == pkgName {
			same = append(same, pf)
		}
	}
	return same, targetFile
}

func (s *server) resolve(path string, pos position) *resolution {
	files, target := s.loadPackage(path)
	if target == nil {
		return nil
	}
	offset := offsetOf(target.src, pos)
	tf := s.fset.File(target.file.Pos())
	if tf == nil || offset > tf.Size() {
		return nil
	}
	p := tf.Pos(offset)

	var ident *ast.Ident
	var selector bool
	ast.Inspect(target.file, func(n ast.Node) bool {
		if n == nil || ident != nil {
			return false
		}
		if n.Pos() > p || n.End() < p {
			return false
		}
		switch x := n.(type) {
		case *ast.SelectorExpr:
			if x.Sel.Pos() <= p && p <= x.Sel.End() {
				ident, selector = x.Sel, true
				return false
			}
		case *ast.Ident:
			if x.Pos() <= p && p <= x.End() {
				ident = x
				return false
			}
		}
		return true
	})

	var name string
	if ident != nil {
		name = ident.Name
		astFiles := make([]*ast.File, len(files))
		for i, f := range files {
			astFiles[i] = f.file
		}
		info := &types.Info{Uses: map[*ast.Ident]types.Object{}, Defs: map[*ast.Ident]types.Object{}}
		conf := types.Config{Importer: s.imp, Error: func(error) {}, FakeImportC: true}
		conf.Check(target.file.Name.Name, s.fset, astFiles, info)
		obj := info.Uses[ident]
		if obj == nil {
			obj = info.Defs[ident]
		}
		if obj != nil && obj.Pos().IsValid() {
			if _, isPkg := obj.(*types.PkgName); isPkg {
				return nil
			}
			return s.describe(obj.Pos(), types.ObjectString(obj, types.RelativeTo(obj.Pkg())), files)
		}
	} else {
		name, selector = wordAt(target.src, offset)
	}
	if name == "" {
		return nil
	}
	return s.byName(name, selector, files, target)
}

// wordAt returns the identifier around offset and whether it follows a '.'.
func wordAt(src []byte, offset int) (string, bool) {
	isPart := func(r rune) bool { return r == '_' || unicode.IsLetter(r) || unicode.IsDigit(r) }
	start, end := offset, offset
	for start > 0 {
		r, size := utf8.DecodeLastRune(src[:start])
		if !isPart(r) {
			break
		}
		start -= size
	}
	for end < len(src) {
		r, size := utf8.DecodeRune(src[end:])
		if !isPart(r) {
			break
		}
		end += size
	}
	if start == end {
		return "", false
	}
	return string(src[start:end]), start > 0 && src[start-1] == '.'
}

// byName searches the package's top-level declarations, or its methods and
// struct fields when the identifier is a selector.
func (s *server) byName(name string, selector bool, files []*parsedFile, target *parsedFile) *resolution {
	for _, pf := range files {
		if pf == target {
			continue
		}
		for _, d := range pf.file.Decls {
			switch decl := d.(type) {
			case *ast.FuncDecl:
				isMethod := decl.Recv != nil
				if decl.Name.Name == name && isMethod == selector {
					return s.describe(decl.Name.Pos(), headerText(pf, decl), files)
				}
			case *ast.GenDecl:
				for _, spec := range decl.Specs {
					switch sp := spec.(type) {
					case *ast.TypeSpec:
						if !selector && sp.Name.Name == name {
							return s.describe(sp.Name.Pos(), "type "+name, files)
						}
						if st, ok := sp.Type.(*ast.StructType); ok && selector {
							for _, f := range st.Fields.List {
								for _, n := range f.Names {
									if n.Name == name {
										return s.describe(n.Pos(), "field "+name, files)
									}
								}
							}
						}
					case *ast.ValueSpec:
						for _, n := range sp.Names {
							if !selector && n.Name == name {
								return s.describe(n.Pos(), "var "+name, files)
							}
						}
					}
				}
			}
		}
	}
	return nil
}

func headerText(pf *parsedFile, decl *ast.FuncDecl) string {
	start := decl.Pos()
	end := decl.Type.End()
	return string(pf.src[offsetIn(pf, start):offsetIn(pf, end)])
}

func offsetIn(pf *parsedFile, p token.Pos) int {
	return int(p) - int(pf.file.FileStart)
}

// describe builds the location and hover text for the declaration at p.
func (s *server) describe(p token.Pos, signature string, files []*parsedFile) *resolution {
	position := s.fset.Position(p)
	if position.Filename == "" {
		return nil
	}
	src, err := s.readFile(position.Filename)
	if err != nil {
		return nil
	}
	start := positionOf(src, position.Offset)
	end := start
	if name, _ := wordAt(src, position.Offset); name != "" {
		end = positionOf(src, position.Offset+len(name))
	}
	res := &resolution{
		loc:       location{URI: pathToURI(position.Filename), Range: lspRange{Start: start, End: end}},
		signature: signature,
	}
	for _, pf := range files {
		if pf.path == position.Filename {
			res.doc = docFor(pf.file, p)
		}
	}
	if res.doc == "" {
		if f, err := parser.ParseFile(token.NewFileSet(), position.Filename, src, parser.ParseComments); err == nil {
			// Positions differ between file sets; match by offset instead.
			res.doc = docFor(f, token.Pos(int(f.FileStart)+position.Offset))
		}
	}
	return res
}

func docFor(f *ast.File, p token.Pos) string {
	for _, d := range f.Decls {
		if d.Pos() > p || d.End() < p {
			continue
		}
		switch decl := d.(type) {
		case *ast.FuncDecl:
			return decl.Doc.Text()
		case *ast.GenDecl:
			for _, spec := range decl.Specs {
				if spec.Pos() <= p && p <= spec.End() {
					if ts, ok := spec.(*ast.TypeSpec); ok && ts.Doc != nil {
						return ts.Doc.Text()
					}
				}
			}
			return decl.Doc.Text()
		}
	}
	return ""
}
