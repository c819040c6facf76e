//! Synthetic Java libraries used as fixtures.
//!
//! [`library`] produces twelve classes under a base package. Together they
//! exercise fields, method bodies, branches and switches, exception tables,
//! stack map frames, inner classes, nest attributes, annotations, generic
//! signatures, invokedynamic and the wide/array/constant instructions.

use crate::asm::*;

/// One class ready to be written into an archive.
#[derive(Debug, Clone)]
pub struct ClassFixture {
    pub internal_name: String,
    pub builder: ClassBuilder,
}

impl ClassFixture {
    pub fn entry_path(&self) -> String {
        format!("{}.class", self.internal_name)
    }

    pub fn bytes(&self) -> Vec<u8> {
        self.builder.build()
    }
}

fn fixture(builder: ClassBuilder) -> ClassFixture {
    ClassFixture { internal_name: builder.name().to_string(), builder }
}

fn serial(cb: &mut ClassBuilder, flavor: u32) {
    cb.field(ACC_PRIVATE | ACC_STATIC | ACC_FINAL, "SERIAL", "I")
        .constant_value(Const::Int(flavor as i32));
}

/// Twelve classes rooted at `base` (an internal package such as `com/example`).
/// Different `flavor`s produce different bytecode for every class.
#[allow(clippy::disallowed_names)]
pub fn library(base: &str, flavor: u32) -> Vec<ClassFixture> {
    let foo = format!("{base}/utils/Foo");
    let bar = format!("{base}/utils/Bar");
    let inner = format!("{base}/utils/Foo$Inner");
    let service = format!("{base}/core/Service");
    let service_impl = format!("{base}/core/ServiceImpl");
    let registry = format!("{base}/core/Registry");
    let reader = format!("{base}/io/Reader");
    let reader_ex = format!("{base}/io/ReaderException");
    let marker = format!("{base}/annotations/Marker");
    let entity = format!("{base}/model/Entity");
    let kind = format!("{base}/model/Kind");
    let shape = format!("{base}/model/Shape");
    let f = flavor as i32;

    let mut out = Vec::new();

    // Foo: fields, constructor, accessors, cross-class calls, debug tables.
    {
        let mut cb = ClassBuilder::new(&foo)
            .source_file("Foo.java")
            .inner_class(&inner, Some(&foo), Some("Inner"), ACC_PUBLIC)
            .nest_members(&[&inner]);
        serial(&mut cb, flavor);
        cb.field(ACC_PRIVATE, "name", "Ljava/lang/String;");
        cb.field(ACC_PRIVATE, "helper", &format!("L{bar};"));
        cb.field(ACC_PUBLIC | ACC_STATIC | ACC_FINAL, "GREETING", "Ljava/lang/String;")
            .constant_value(Const::Str(format!("hello-{flavor}")));
        let mut c = Code::new(3, 2);
        let (s, e) = (c.label(), c.label());
        c.mark(s)
            .aload(0)
            .invokespecial("java/lang/Object", "<init>", "()V")
            .aload(0)
            .aload(1)
            .putfield(&foo, "name", "Ljava/lang/String;")
            .aload(0)
            .new_(&bar)
            .dup()
            .invokespecial(&bar, "<init>", "()V")
            .putfield(&foo, "helper", &format!("L{bar};"))
            .return_()
            .mark(e)
            .line(s, 10 + flavor as u16)
            .local_var(s, e, "this", &format!("L{foo};"), 0)
            .local_var(s, e, "name", "Ljava/lang/String;", 1);
        cb.method(ACC_PUBLIC, "<init>", "(Ljava/lang/String;)V").code(c);
        let mut c = Code::new(1, 1);
        c.aload(0).getfield(&foo, "name", "Ljava/lang/String;").areturn();
        cb.method(ACC_PUBLIC, "getName", "()Ljava/lang/String;").code(c);
        let mut c = Code::new(3, 2);
        c.aload(0)
            .getfield(&foo, "helper", &format!("L{bar};"))
            .iload(1)
            .iconst(f + 7)
            .invokevirtual(&bar, "combine", "(II)I")
            .ireturn();
        cb.method(ACC_PUBLIC, "compute", "(I)I").code(c);
        let mut c = Code::new(3, 1);
        c.new_(&inner)
            .dup()
            .aload(0)
            .invokespecial(&inner, "<init>", &format!("(L{foo};)V"))
            .areturn();
        cb.method(ACC_PUBLIC, "inner", &format!("()L{inner};")).code(c);
        out.push(fixture(cb));
    }

    // Foo$Inner: outer-instance field, nest host.
    {
        let mut cb = ClassBuilder::new(&inner)
            .inner_class(&inner, Some(&foo), Some("Inner"), ACC_PUBLIC)
            .nest_host(&foo);
        serial(&mut cb, flavor);
        cb.field(ACC_FINAL | ACC_SYNTHETIC, "this$0", &format!("L{foo};"));
        let mut c = Code::new(2, 2);
        c.aload(0)
            .aload(1)
            .putfield(&inner, "this$0", &format!("L{foo};"))
            .aload(0)
            .invokespecial("java/lang/Object", "<init>", "()V")
            .return_();
        cb.method(ACC_PUBLIC, "<init>", &format!("(L{foo};)V")).code(c);
        let mut c = Code::new(1, 1);
        c.aload(0)
            .getfield(&inner, "this$0", &format!("L{foo};"))
            .invokevirtual(&foo, "getName", "()Ljava/lang/String;")
            .areturn();
        cb.method(ACC_PUBLIC, "outerName", "()Ljava/lang/String;").code(c);
        out.push(fixture(cb));
    }

    // Bar: arithmetic, conditional branches, table and lookup switches.
    {
        let mut cb = ClassBuilder::new(&bar);
        serial(&mut cb, flavor);
        cb.default_constructor();
        let mut c = Code::new(2, 3);
        c.iload(1).iload(2).op(0x60).iconst(f).op(0x60).ireturn();
        cb.method(ACC_PUBLIC, "combine", "(II)I").code(c);
        let mut c = Code::new(2, 1);
        let (one, two, three, dflt) = (c.label(), c.label(), c.label(), c.label());
        c.iload(0)
            .tableswitch(dflt, 1, vec![one, two, three])
            .mark(one)
            .frame_same(one)
            .iconst(10 + f)
            .ireturn()
            .mark(two)
            .frame_same(two)
            .iconst(20)
            .ireturn()
            .mark(three)
            .frame_same(three)
            .iconst(30)
            .ireturn()
            .mark(dflt)
            .frame_same(dflt)
            .iconst(-1)
            .ireturn();
        cb.method(ACC_PUBLIC | ACC_STATIC, "pick", "(I)I").code(c);
        let mut c = Code::new(2, 1);
        let (a, b, dflt) = (c.label(), c.label(), c.label());
        c.iconst(0)
            .pop()
            .iload(0)
            .lookupswitch(dflt, vec![(-5, a), (1000 + f, b)])
            .mark(a)
            .ldc_str("minus five")
            .areturn()
            .mark(b)
            .ldc_str("thousand")
            .areturn()
            .mark(dflt)
            .ldc_str("other")
            .areturn();
        cb.method(ACC_PUBLIC | ACC_STATIC, "describe", "(I)Ljava/lang/String;").code(c);
        let mut c = Code::new(2, 1);
        let (neg, done) = (c.label(), c.label());
        c.iload(0)
            .branch(0x9b, neg) // iflt
            .iload(0)
            .ireturn()
            .mark(neg)
            .iload(0)
            .op(0x74) // ineg
            .goto(done)
            .mark(done)
            .ireturn();
        cb.method(ACC_PUBLIC | ACC_STATIC, "abs", "(I)I").code(c);
        out.push(fixture(cb));
    }

    // Service: generic interface.
    {
        let mut cb = ClassBuilder::new(&service)
            .access(ACC_PUBLIC | ACC_INTERFACE | ACC_ABSTRACT)
            .signature("<T:Ljava/lang/Object;>Ljava/lang/Object;");
        serial(&mut cb, flavor);
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "handle", "(Ljava/lang/Object;)Ljava/lang/Object;")
            .signature("(TT;)TT;");
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "owner", &format!("()L{foo};"));
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "all", "()Ljava/util/List;")
            .signature(&format!("()Ljava/util/List<+L{foo};>;"));
        out.push(fixture(cb));
    }

    // ServiceImpl: implements a parameterized interface, bridge method.
    {
        let mut cb = ClassBuilder::new(&service_impl)
            .implements(&service)
            .signature(&format!(
                "Ljava/lang/Object;L{service}<Ljava/lang/String;>;"
            ));
        serial(&mut cb, flavor);
        cb.field(ACC_PRIVATE, "items", "Ljava/util/List;")
            .signature(&format!("Ljava/util/List<L{foo};>;"));
        cb.default_constructor();
        let mut c = Code::new(2, 2);
        c.aload(1).invokevirtual("java/lang/String", "trim", "()Ljava/lang/String;").areturn();
        cb.method(ACC_PUBLIC, "handle", "(Ljava/lang/String;)Ljava/lang/String;").code(c);
        let mut c = Code::new(2, 2);
        c.aload(0)
            .aload(1)
            .checkcast("java/lang/String")
            .invokevirtual(&service_impl, "handle", "(Ljava/lang/String;)Ljava/lang/String;")
            .areturn();
        cb.method(
            ACC_PUBLIC | ACC_BRIDGE | ACC_SYNTHETIC,
            "handle",
            "(Ljava/lang/Object;)Ljava/lang/Object;",
        )
        .code(c);
        let mut c = Code::new(3, 1);
        c.new_(&foo)
            .dup()
            .ldc_str("owner")
            .invokespecial(&foo, "<init>", "(Ljava/lang/String;)V")
            .areturn();
        cb.method(ACC_PUBLIC, "owner", &format!("()L{foo};")).code(c);
        let mut c = Code::new(1, 1);
        c.aload(0).getfield(&service_impl, "items", "Ljava/util/List;").areturn();
        cb.method(ACC_PUBLIC, "all", "()Ljava/util/List;")
            .signature(&format!("()Ljava/util/List<+L{foo};>;"))
            .code(c);
        out.push(fixture(cb));
    }

    // Registry: invokedynamic lambda with bootstrap arguments in our package.
    {
        let mut cb = ClassBuilder::new(&registry)
            .inner_class(
                "java/lang/invoke/MethodHandles$Lookup",
                Some("java/lang/invoke/MethodHandles"),
                Some("Lookup"),
                ACC_PUBLIC | ACC_STATIC | ACC_FINAL,
            );
        serial(&mut cb, flavor);
        let meta = Const::MethodHandle(
            REF_INVOKE_STATIC,
            Box::new(Const::Method(
                "java/lang/invoke/LambdaMetafactory".into(),
                "metafactory".into(),
                "(Ljava/lang/invoke/MethodHandles$Lookup;Ljava/lang/String;Ljava/lang/invoke/MethodType;Ljava/lang/invoke/MethodType;Ljava/lang/invoke/MethodHandle;Ljava/lang/invoke/MethodType;)Ljava/lang/invoke/CallSite;".into(),
            )),
        );
        let bsm = cb.bootstrap(
            meta,
            vec![
                Const::MethodType("(Ljava/lang/Object;)Ljava/lang/Object;".into()),
                Const::MethodHandle(
                    REF_INVOKE_STATIC,
                    Box::new(Const::Method(
                        registry.clone(),
                        "lambda$lookup$0".into(),
                        format!("(L{foo};)Ljava/lang/String;"),
                    )),
                ),
                Const::MethodType(format!("(L{foo};)Ljava/lang/String;")),
            ],
        );
        cb.default_constructor();
        let mut c = Code::new(1, 1);
        c.invokedynamic(bsm, "apply", "()Ljava/util/function/Function;").areturn();
        cb.method(ACC_PUBLIC | ACC_STATIC, "lookup", "()Ljava/util/function/Function;")
            .signature(&format!("()Ljava/util/function/Function<L{foo};Ljava/lang/String;>;"))
            .code(c);
        let mut c = Code::new(2, 1);
        c.aload(0)
            .invokevirtual(&foo, "getName", "()Ljava/lang/String;")
            .ldc_str(&format!("suffix{flavor}"))
            .invokevirtual("java/lang/String", "concat", "(Ljava/lang/String;)Ljava/lang/String;")
            .areturn();
        cb.method(
            ACC_PRIVATE | ACC_STATIC | ACC_SYNTHETIC,
            "lambda$lookup$0",
            &format!("(L{foo};)Ljava/lang/String;"),
        )
        .code(c);
        out.push(fixture(cb));
    }

    // ReaderException.
    {
        let mut cb = ClassBuilder::new(&reader_ex).super_class(Some("java/lang/Exception"));
        serial(&mut cb, flavor);
        let mut c = Code::new(2, 2);
        c.aload(0)
            .aload(1)
            .invokespecial("java/lang/Exception", "<init>", "(Ljava/lang/String;)V")
            .return_();
        cb.method(ACC_PUBLIC, "<init>", "(Ljava/lang/String;)V").code(c);
        out.push(fixture(cb));
    }

    // Reader: try/catch regions, catch-all, thrown exceptions, frames.
    {
        let mut cb = ClassBuilder::new(&reader);
        serial(&mut cb, flavor);
        cb.default_constructor();
        let mut c = Code::new(3, 3);
        let (start, end, io, own, any, out_l) =
            (c.label(), c.label(), c.label(), c.label(), c.label(), c.label());
        c.mark(start)
            .aload(1)
            .invokevirtual("java/io/InputStream", "read", "()I")
            .istore(2)
            .mark(end)
            .goto(out_l)
            .mark(io)
            .frame_stack_object(io, "java/io/IOException")
            .astore(2)
            .new_(&reader_ex)
            .dup()
            .ldc_str("io failure")
            .invokespecial(&reader_ex, "<init>", "(Ljava/lang/String;)V")
            .athrow()
            .mark(own)
            .frame_stack_object(own, &reader_ex)
            .athrow()
            .mark(any)
            .frame_stack_object(any, "java/lang/Throwable")
            .athrow()
            .mark(out_l)
            .frame_same(out_l)
            .iconst(f)
            .ireturn()
            .handler(start, end, io, Some("java/io/IOException"))
            .handler(start, end, own, Some(&reader_ex))
            .handler(start, end, any, None);
        cb.method(ACC_PUBLIC, "read", "(Ljava/io/InputStream;)I")
            .exceptions(&[&reader_ex])
            .code(c);
        out.push(fixture(cb));
    }

    // Marker: annotation type.
    {
        let mut cb = ClassBuilder::new(&marker)
            .access(ACC_PUBLIC | ACC_INTERFACE | ACC_ABSTRACT | ACC_ANNOTATION)
            .implements("java/lang/annotation/Annotation")
            .annotations(
                true,
                vec![Annotation::new("Ljava/lang/annotation/Retention;").with(
                    "value",
                    Elem::Enum(
                        "Ljava/lang/annotation/RetentionPolicy;".into(),
                        "RUNTIME".into(),
                    ),
                )],
            );
        serial(&mut cb, flavor);
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "value", "()Ljava/lang/String;");
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "kind", &format!("()L{kind};"));
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "type", "()Ljava/lang/Class;");
        out.push(fixture(cb));
    }

    // Entity: annotations of every element-value shape, generic field.
    {
        let ann = Annotation::new(&format!("L{marker};"))
            .with("value", Elem::Const(b's', Const::Utf8(format!("entity-{flavor}"))))
            .with("kind", Elem::Enum(format!("L{kind};"), "SQUARE".into()))
            .with("type", Elem::Class(format!("L{foo};")))
            .with("weight", Elem::Const(b'I', Const::Int(f + 3)))
            .with("ratio", Elem::Const(b'D', Const::Double(1.5f64.to_bits())))
            .with(
                "tags",
                Elem::Array(vec![
                    Elem::Const(b's', Const::Utf8("a".into())),
                    Elem::Class(format!("[L{bar};")),
                ]),
            )
            .with(
                "nested",
                Elem::Nested(Annotation::new("Ljava/lang/Deprecated;")),
            );
        let mut cb = ClassBuilder::new(&entity)
            .annotations(true, vec![ann])
            .annotations(false, vec![Annotation::new(&format!("L{marker};"))]);
        serial(&mut cb, flavor);
        cb.field(ACC_PRIVATE, "children", "Ljava/util/List;")
            .signature(&format!("Ljava/util/List<L{entity};>;"))
            .annotations(
                true,
                vec![Annotation::new(&format!("L{marker};"))
                    .with("value", Elem::Const(b's', Const::Utf8("kids".into())))],
            );
        cb.field(ACC_PRIVATE, "lookup", "Ljava/util/Map;").signature(&format!(
            "Ljava/util/Map<Ljava/lang/String;+L{base}/utils/Foo$Inner;>;"
        ));
        cb.default_constructor();
        let mut c = Code::new(1, 1);
        c.aload(0).getfield(&entity, "children", "Ljava/util/List;").areturn();
        cb.method(ACC_PUBLIC, "children", "()Ljava/util/List;")
            .signature(&format!("()Ljava/util/List<L{entity};>;"))
            .deprecated()
            .code(c);
        out.push(fixture(cb));
    }

    // Kind: statics, <clinit>, arrays, casts, wide constants.
    {
        let mut cb = ClassBuilder::new(&kind).access(ACC_PUBLIC | ACC_FINAL | ACC_SUPER | ACC_ENUM);
        serial(&mut cb, flavor);
        cb.field(ACC_PUBLIC | ACC_STATIC | ACC_FINAL | ACC_ENUM, "SQUARE", &format!("L{kind};"));
        cb.field(ACC_PRIVATE | ACC_STATIC, "GRID", &format!("[[L{foo};"));
        cb.field(ACC_PRIVATE | ACC_STATIC | ACC_FINAL, "BIG", "J")
            .constant_value(Const::Long(1 << 40));
        cb.default_constructor();
        let mut c = Code::new(4, 1);
        c.new_(&kind)
            .dup()
            .invokespecial(&kind, "<init>", "()V")
            .putstatic(&kind, "SQUARE", &format!("L{kind};"))
            .iconst(2)
            .iconst(3)
            .multianewarray(&format!("[[L{foo};"), 2)
            .putstatic(&kind, "GRID", &format!("[[L{foo};"))
            .return_();
        cb.method(ACC_STATIC, "<clinit>", "()V").code(c);
        let mut c = Code::new(4, 300);
        c.ldc2_w(Const::Long(123_456_789_012 + flavor as i64))
            .op(0x58) // pop2
            .ldc2_w(Const::Double(2.25f64.to_bits()))
            .op(0x58)
            .ldc(Const::Float(0.5f32.to_bits()))
            .pop()
            .ldc(Const::Class(bar.clone()))
            .pop()
            .ldc_w(Const::Class(format!("[L{foo};")))
            .pop()
            .iconst(100_000 + f)
            .pop()
            .wide_iinc(260, 5)
            .aload(0)
            .instanceof(&foo)
            .pop()
            .aload(0)
            .checkcast(&format!("[L{kind};"))
            .pop()
            .iconst(4)
            .anewarray(&inner)
            .areturn();
        cb.method(ACC_PUBLIC | ACC_STATIC, "mix", &format!("(Ljava/lang/Object;)[L{inner};")).code(c);
        out.push(fixture(cb));
    }

    // Shape: sealed hierarchy root.
    {
        let mut cb = ClassBuilder::new(&shape)
            .access(ACC_PUBLIC | ACC_ABSTRACT | ACC_SUPER)
            .major(61)
            .permitted_subclasses(&[&entity, &kind]);
        serial(&mut cb, flavor);
        cb.default_constructor();
        cb.method(ACC_PUBLIC | ACC_ABSTRACT, "area", "()D");
        let mut c = Code::new(2, 1);
        c.aload(0).instanceof(&entity).ireturn();
        cb.method(ACC_PUBLIC, "isEntity", "()Z").code(c);
        out.push(fixture(cb));
    }

    out
}

/// A single small `com.example.utils.Foo` class.
pub fn foo_class() -> ClassBuilder {
    library("com/example", 0).into_iter().next().unwrap().builder
}

/// A class with no members at all.
pub fn empty_class(name: &str) -> ClassBuilder {
    ClassBuilder::new(name).source_file("Empty.java")
}

/// The default fixture corpus: three libraries in unrelated packages.
pub fn corpus() -> Vec<ClassFixture> {
    let mut all = library("com/example", 0);
    all.extend(library("org/acme/lib", 1));
    all.extend(library("net/demo", 2));
    all
}
